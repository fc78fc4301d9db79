import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ctcsim as cs
from ctcsim import Channel, build_circuit, make_gate

SQ2 = 2**-0.5


def angle():
    return st.floats(min_value=-3.1, max_value=3.1, allow_nan=False)


def qubit_amps(draw, angles):
    t, p = angles
    return (math.cos(t), math.sin(t) * complex(math.cos(p), math.sin(p)))


def loop_with_rotations(theta_loop, theta_ext, phase):
    """One looped and one external qubit with generic single- and two-qubit gates."""
    return build_circuit(
        [Channel("tm", looped=True), Channel("ex", init=(0.8, 0.6))],
        [
            make_gate("ROT", ("tm",), params=(theta_loop,)),
            make_gate("CROT", ("ex", "tm"), params=(theta_ext,)),
            make_gate("CPHASE", ("tm", "ex"), params=(phase,)),
        ],
    )


def two_loop_circuit(theta):
    return build_circuit(
        [Channel("t1", looped=True), Channel("t2", looped=True),
         Channel("ex", init=(0.6, 0.8))],
        [make_gate("CX", ("t1", "t2")),
         make_gate("CROT", ("t2", "ex"), params=(theta,))],
    )


@settings(max_examples=40, deadline=None)
@given(angle(), angle(), angle())
def test_projection_weights_complete_for_unitary_circuits(a, b, c):
    table = cs.projection_table(loop_with_rotations(a, b, c))
    assert table.total_weight == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(angle())
def test_projection_weights_complete_with_two_loops(theta):
    table = cs.projection_table(two_loop_circuit(theta))
    assert len(table.entries) == 16
    assert table.total_weight == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(angle(), angle(), angle())
def test_noisy_bell_converges_to_exact(a, b, c):
    circuit = loop_with_rotations(a, b, c)
    try:
        exact = cs.run_exact_bell(circuit)
    except cs.ParadoxError:
        return
    if exact.z < 0.01:
        return
    noisy = cs.run_noisy_bell(circuit, 1e-9)
    assert noisy.z == pytest.approx(exact.z, abs=1e-8)
    assert np.allclose(noisy.rho.mat, exact.rho.mat, atol=1e-7)


def test_noisy_bell_at_zero_equals_exact():
    circuit = loop_with_rotations(0.4, 0.9, 1.3)
    exact = cs.run_exact_bell(circuit)
    noisy = cs.run_noisy_bell(circuit, 0.0)
    assert noisy.z == pytest.approx(exact.z, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(angle(), angle())
def test_global_pair_phase_drops_out(a, b):
    """Re-phasing a boundary pair leaves every reported quantity unchanged."""
    circuit = loop_with_rotations(a, b, 0.7)
    base = cs.run_exact_bell(
        circuit, pair_states={"tm": np.array([SQ2, 0, 0, SQ2])}
    )
    phased = cs.run_exact_bell(
        circuit, pair_states={"tm": np.exp(0.9j) * np.array([SQ2, 0, 0, SQ2])}
    )
    assert phased.n == pytest.approx(base.n, abs=1e-12)
    assert np.allclose(phased.rho.mat, base.rho.mat, atol=1e-12)


def test_custom_pair_state_changes_selection():
    circuit = build_circuit(
        [Channel("tm", looped=True)], [make_gate("Z", ("tm",))]
    )
    with pytest.raises(cs.ParadoxError):
        cs.run_exact_bell(circuit)
    # an unentangled boundary pair pinned to |00> accepts the phase flip
    pinned = cs.run_exact_bell(
        circuit, pair_states={"tm": np.array([1.0, 0, 0, 0.0])}
    )
    assert pinned.n == pytest.approx(1.0)


def test_no_loop_raises():
    circuit = build_circuit([Channel("a", init=(1.0, 0.0))])
    with pytest.raises(cs.NoCtcError):
        cs.run_exact_bell(circuit)


def test_bad_noise_parameter_rejected():
    circuit = loop_with_rotations(0.1, 0.2, 0.3)
    with pytest.raises(cs.ConfigError):
        cs.run_noisy_bell(circuit, 1.5)
    with pytest.raises(cs.ConfigError):
        cs.run_classical(circuit, -0.1)


def test_tolerance_env_override(monkeypatch):
    monkeypatch.setenv("CTC_SIM_TOLERANCE", "2.0")
    circuit = loop_with_rotations(0.0, 0.0, 0.0)
    with pytest.raises(cs.ParadoxError):
        cs.run_exact_bell(circuit)
    monkeypatch.delenv("CTC_SIM_TOLERANCE")
    assert cs.run_exact_bell(circuit).n == pytest.approx(1.0)


# classical channel ----------------------------------------------------------


def cpf_gun(alpha=0.8, beta=0.6):
    return build_circuit(
        [Channel("tm", looped=True), Channel("gun", init=(alpha, beta))],
        [make_gate("CPHASE", ("gun", "tm"), params=(math.pi,))],
    )


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.95), angle())
def test_classical_conventions_differ_by_the_floor_weight(k, t):
    """For a diagonal-history circuit the conventions differ only by the
    unconditional reemission weight k."""
    circuit = cpf_gun(math.cos(t), math.sin(t))
    flip = cs.run_classical(circuit, k)
    floor = cs.run_classical(circuit, k, floor=True)
    assert floor.z == pytest.approx(flip.z + k, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(angle(), angle(), angle())
def test_classical_half_is_fully_unskewed(a, b, c):
    """At k = 1/2 the acceptance rate ignores every external input."""
    circuit = loop_with_rotations(a, b, c)
    z0 = cs.run_classical(circuit, 0.5).z
    z1 = cs.run_classical(cs.with_init(circuit, "ex", (0.0, 1.0)), 0.5).z
    assert z1 == pytest.approx(z0, abs=1e-12)


def test_classical_two_qubit_flip_weights_are_products():
    circuit = two_loop_circuit(0.9)
    k = 0.3
    r = cs.run_classical(circuit, k)
    weights = {}
    for e in r.projections.entries:
        i, j = (int(x) for x in e.label.split("|"))
        flips = bin(i ^ j).count("1")
        weights.setdefault(flips, 0.0)
    for e in r.projections.entries:
        i, j = (int(x) for x in e.label.split("|"))
        if e.weight > 0:
            flips = bin(i ^ j).count("1")
            hist = e.state.norm**2
            assert e.weight == pytest.approx(
                (1 - k) ** (2 - flips) * k**flips * hist, abs=1e-12
            )


def test_classical_floor_handles_vanishing_diagonal_history():
    circuit = build_circuit(
        [Channel("tm", looped=True), Channel("gun", init=(0.0, 1.0))],
        [make_gate("CX", ("gun", "tm"))],
    )
    k = 0.3
    r = cs.run_classical(circuit, k, floor=True)
    assert r.z == pytest.approx(k, abs=1e-12)
    assert np.allclose(r.rho.mat, np.diag([0.0, 1.0]), atol=1e-12)


def test_classical_paradox_at_zero_noise():
    circuit = build_circuit([Channel("tm", looped=True)], [make_gate("X", ("tm",))])
    with pytest.raises(cs.ParadoxError):
        cs.run_classical(circuit, 0.0)
    assert cs.run_classical(circuit, 0.2).z == pytest.approx(0.4)


# weight matrix --------------------------------------------------------------


def test_weight_matrix_flat_is_uniform_history_average():
    circuit = cpf_gun()
    r = cs.run_weight_matrix(circuit, "flat")
    # histories: diagonal norms 1, off-diagonal 0; flat weight 1/2 each
    assert r.z == pytest.approx(1.0, abs=1e-12)


def test_weight_matrix_custom_is_normalized_to_sum_d():
    circuit = cpf_gun()
    ones = cs.run_weight_matrix(circuit, np.ones((2, 2)))
    flat = cs.run_weight_matrix(circuit, "flat")
    assert ones.z == pytest.approx(flat.z, abs=1e-12)
    pinned = cs.run_weight_matrix(circuit, np.array([[2.0, 0.0], [0.0, 0.0]]))
    assert pinned.z == pytest.approx(2.0, abs=1e-12)


def test_weight_matrix_quad_weights():
    # quad weights (2*delta_ij + 1) / (d + 2)
    circuit = cpf_gun()
    r = cs.run_weight_matrix(circuit, "quad")
    assert r.z == pytest.approx(2 * 0.75, abs=1e-12)


def test_weight_matrix_rejects_negative_entries():
    with pytest.raises(cs.ConfigError):
        cs.run_weight_matrix(cpf_gun(), np.array([[3.0, 0.0], [0.0, -1.0]]))


# conditional projection -----------------------------------------------------


def three_plus():
    plus = (SQ2, SQ2)
    return build_circuit(
        [Channel("m1", init=plus), Channel("m2", init=plus),
         Channel("m3", init=plus)]
    )


def test_conditional_coupled_renormalizes_globally():
    r = cs.run_conditional(
        three_plus(), [("m1", 0), ("m2", 0)], (("m3",), np.array([1.0, 0.0])),
        "coupled",
    )
    diag = np.real(np.diag(r.rho.mat))
    assert diag[0] == pytest.approx(0.0, abs=1e-12)
    assert diag[1] == pytest.approx(1 / 7, abs=1e-12)
    assert diag[2] == pytest.approx(1 / 7, abs=1e-12)


def test_conditional_insulated_preserves_branch_weight():
    r = cs.run_conditional(
        three_plus(), [("m1", 0), ("m2", 0)], (("m3",), np.array([1.0, 0.0])),
        "insulated",
    )
    diag = np.real(np.diag(r.rho.mat))
    assert diag[0] == pytest.approx(0.0, abs=1e-12)
    assert diag[1] == pytest.approx(0.25, abs=1e-12)
    assert diag[2] == pytest.approx(1 / 8, abs=1e-12)


def test_conditional_rejects_looped_circuits():
    circuit = cpf_gun()
    with pytest.raises(cs.UnsupportedError):
        cs.run_conditional(
            circuit, [("gun", 0)], (("gun",), np.array([1.0, 0.0])), "coupled"
        )


# dispatch -------------------------------------------------------------------


def test_model_objects_dispatch():
    circuit = cpf_gun()
    assert cs.run(circuit, cs.ExactBell()).model == "exact_bell"
    assert cs.run(circuit, cs.NoisyBell(0.2)).model == "noisy_bell"
    assert cs.run(circuit, cs.Classical(0.2)).model == "classical"
    assert cs.run(circuit, cs.WeightMatrix("flat")).model == "weight_matrix"
    assert cs.run(circuit, cs.DeltaQuadrature()).model == "delta_quadrature"


def test_acceptance_alias():
    r = cs.run_exact_bell(cpf_gun())
    assert r.acceptance == r.z
