"""Post-selection engine for circuits with looped (time-machine) channels.

The exact model appends one maximally entangled reference pair per looped
channel, runs the gate list (which never touches the reference qubits), and
projects every pair back onto the same entangled state.  The squared norm of
the surviving amplitude is the acceptance rate Z = N^2; a vanishing norm is a
paradox.  The other models relax the projection:

* noisy pairs -- each pair is projected onto the full entangled basis and the
  four outcomes are mixed with weights (1 - 3*lam/4) on the matched outcome
  and lam/4 on each of the three others, independently per channel;
* classical channel -- the loop register is replaced by classical histories
  over computational eigenstates, weight (1-k) per preserved bit and k per
  flipped bit (product over loop qubits), or a flat k/d floor over diagonal
  histories when floor=True;
* weight matrix -- arbitrary nonnegative weights over (emerging, entering)
  eigenstate pairs, with flat / quad / delta built-ins;
* delta quadrature -- the continuous single-qubit loop boundary condition
  |phi> = cos(theta)|0> + e^{i xi} sin(theta)|1>, integrated over the flat
  measure d(theta) d(xi) on [0, pi] x [0, 2*pi] (not the Haar measure; the
  flat measure is what the closed forms in the catalog assume).

Z conventions: exact/noisy values include the 2^-m normalization of the m
reference pairs; weight-matrix weights are normalized to sum d except for the
delta built-in, which carries the flat-measure constant so that it equals the
quadrature Z exactly; classical product weights carry no extra constant.
Reported density operators are always trace-1, with Z separate.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

from .circuit import evolve, with_init
from .errors import (
    ConfigError,
    NoCtcError,
    ParadoxError,
    UnsupportedError,
)
from .states import (
    DEFAULT_PARADOX_TOL,
    DensityOperator,
    PureState,
    _permute_density,
    apply_gate,
    project,
    tensor,
    tensor_all,
)

TOLERANCE_ENV_VAR = "CTC_SIM_TOLERANCE"

_SQ2 = 2**-0.5
# Orthonormal basis of a reference pair, keyed by outcome label.  "B" is the
# matched (consistent-history) outcome; "-" flips the relative phase; "N"
# negates the bit; "-N" does both.
PAIR_BASIS = {
    "B": np.array([_SQ2, 0, 0, _SQ2], dtype=complex),
    "-": np.array([_SQ2, 0, 0, -_SQ2], dtype=complex),
    "N": np.array([0, _SQ2, _SQ2, 0], dtype=complex),
    "-N": np.array([0, _SQ2, -_SQ2, 0], dtype=complex),
}
PAIR_LABELS = ("B", "-", "N", "-N")


def resolve_tolerance(tol=None):
    """Paradox tolerance: explicit argument, else environment, else 1e-12."""
    if tol is not None:
        return float(tol)
    env = os.environ.get(TOLERANCE_ENV_VAR)
    if env:
        try:
            return float(env)
        except ValueError:
            raise ConfigError("bad %s value %r" % (TOLERANCE_ENV_VAR, env))
    return DEFAULT_PARADOX_TOL


def _ref(label):
    return label + ".ref"


@dataclass(frozen=True)
class ProjectionEntry:
    label: str  # comma-joined per-channel outcome labels, e.g. "B" or "B,N"
    state: PureState  # unnormalized surviving state on the external channels
    weight: float  # squared norm of that state


@dataclass(frozen=True)
class ProjectionSet:
    entries: tuple
    channel_order: tuple  # looped channel labels, declaration order

    def __getitem__(self, label):
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    @property
    def total_weight(self):
        return float(sum(e.weight for e in self.entries))

    def to_dict(self):
        return {
            "channel_order": list(self.channel_order),
            "entries": [
                {"label": e.label, "weight": e.weight,
                 "amplitudes": [[z.real, z.imag] for z in e.state.amps]}
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class PostSelectionResult:
    model: str
    z: float
    rho: DensityOperator  # trace-1, on the external channels (declaration order)
    n: float = None  # survival amplitude norm, exact model only
    rho_loop: DensityOperator = None  # loop-register state, where defined
    projections: ProjectionSet = None
    metadata: dict = field(default_factory=dict)

    @property
    def acceptance(self):
        """Acceptance rate of the post-selection; alias for `z`."""
        return self.z


def _require_loops(circuit):
    loops = circuit.loop_labels
    if not loops:
        raise NoCtcError("circuit has no looped channel")
    return loops


def pair_out_state(circuit, pair_states=None):
    """Initial state with one entangled (reference, loop) pair per looped channel.

    Pairs come first in declaration order, each as (reference, loop), then the
    external register.  `pair_states` optionally overrides the matched pair
    state per channel label (used for twisted / re-phased boundary pairs).
    """
    loops = _require_loops(circuit)
    factors = []
    for label in loops:
        amps = PAIR_BASIS["B"]
        if pair_states and label in pair_states:
            amps = np.asarray(pair_states[label], dtype=complex)
            if amps.shape != (4,) or abs(np.linalg.norm(amps) - 1.0) > 1e-9:
                raise ConfigError("pair state for %r must be a normalized 2-qubit state"
                                  % (label,))
        factors.append(PureState(amps, (_ref(label), label)))
    ext = circuit.initial_external_state()
    if ext.n_qubits:
        factors.append(ext)
    return tensor_all(factors)


def _rho_from_matrix(mat, labels, circuit):
    if not labels:
        return DensityOperator(np.array([[1.0]], dtype=complex), ())
    rho = DensityOperator(mat, labels)
    order = tuple(l for l in circuit.external_labels if l in labels)
    if order != labels:
        rho = _permute_density(rho, order)
    return rho


def projection_table(circuit, pair_states=None):
    """Project the evolved state onto the full pair basis of every loop.

    Returns a ProjectionSet with one entry per outcome label combination
    (4^m entries for m looped channels).  For unitary circuits the weights
    sum to 1 (resolution of the identity on the reference pairs).
    Custom pair states only replace the matched ("B") basis vector and are
    rejected here because the remaining outcomes would not stay orthonormal;
    use run_exact_bell for those.
    """
    loops = _require_loops(circuit)
    if pair_states:
        raise ConfigError("projection_table requires the standard pair basis")
    state = evolve(pair_out_state(circuit), circuit)
    entries = []
    for combo in itertools.product(PAIR_LABELS, repeat=len(loops)):
        surv = state
        for label, outcome in zip(loops, combo):
            bra = PureState(PAIR_BASIS[outcome], (_ref(label), label))
            surv = project(surv, bra)
        entries.append(ProjectionEntry(",".join(combo), surv, surv.norm**2))
    return ProjectionSet(tuple(entries), loops)


def run_exact_bell(circuit, tol=None, pair_states=None):
    """Exact post-selected evolution: keep only the matched-pair outcome."""
    tol = resolve_tolerance(tol)
    loops = _require_loops(circuit)
    if pair_states:
        state = evolve(pair_out_state(circuit, pair_states), circuit)
        surv = state
        for label in loops:
            amps = pair_states.get(label, PAIR_BASIS["B"])
            bra = PureState(np.asarray(amps, dtype=complex), (_ref(label), label))
            surv = project(surv, bra)
        table = None
        matched = surv
    else:
        table = projection_table(circuit)
        matched = table[",".join(["B"] * len(loops))].state
    n = matched.norm
    if n < tol:
        raise ParadoxError(
            "matched-pair amplitude %.3e below tolerance %.3e: no consistent history"
            % (n, tol),
            projections=table,
        )
    unit = PureState(matched.amps / n, matched.labels)
    rho = _rho_from_matrix(np.outer(unit.amps, unit.amps.conj()), unit.labels, circuit)
    return PostSelectionResult(
        model="exact_bell", z=n**2, rho=rho, n=n, projections=table,
        metadata={"tolerance": tol},
    )


def run_noisy_bell(circuit, lam, tol=None):
    """Depolarized pair projection: mix all 4^m outcomes with product weights."""
    tol = resolve_tolerance(tol)
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ConfigError("noise parameter lam must lie in [0, 1]")
    loops = _require_loops(circuit)
    table = projection_table(circuit)
    z = 0.0
    dim = 2 ** len(table.entries[0].state.labels)
    num = np.zeros((dim, dim), dtype=complex)
    weights = {}
    for entry in table.entries:
        combo = entry.label.split(",")
        w = 1.0
        for outcome in combo:
            w *= (1.0 - 0.75 * lam) if outcome == "B" else 0.25 * lam
        weights[entry.label] = w
        z += w * entry.weight
        num += w * np.outer(entry.state.amps, entry.state.amps.conj())
    if z < tol:
        raise ParadoxError("acceptance rate %.3e below tolerance" % z, projections=table)
    rho = _rho_from_matrix(num / z, table.entries[0].state.labels, circuit)
    return PostSelectionResult(
        model="noisy_bell", z=z, rho=rho, projections=table,
        metadata={"lam": lam, "mixture_weights": weights, "tolerance": tol},
    )


def loop_histories(circuit):
    """Amplitudes of eigenstate loop histories.

    histories[(i, j)] is the unnormalized external state when the loop
    register emerges as |e_i>, evolves with the externals, and is projected
    onto |e_j> at the end.  Consistent histories are the diagonal i == j.
    """
    loops = _require_loops(circuit)
    m = len(loops)
    d = 2**m
    ext0 = circuit.initial_external_state()
    histories = {}
    for i in range(d):
        bits = [(i >> (m - 1 - q)) & 1 for q in range(m)]
        start = PureState.computational(bits, loops)
        state = start if not ext0.n_qubits else tensor(start, ext0)
        state = evolve(state, circuit)
        for j in range(d):
            bits_j = [(j >> (m - 1 - q)) & 1 for q in range(m)]
            bra = PureState.computational(bits_j, loops)
            histories[(i, j)] = project(state, bra)
    return histories, d


def run_classical(circuit, k, floor=False, tol=None):
    """Classical loop register with bit-flip error rate k.

    floor=False: every (emerging, entering) history (i, j) gets weight
    (1-k)^(#preserved bits) * k^(#flipped bits).  floor=True: only diagonal
    histories carry signal weight (1-k), plus a flat floor k/d of random
    reemission per eigenstate (external register traced over the entering
    state), the convention some closed forms in the catalog use.
    At k = 1/2 (floor=False) the channel is fully unskewed: Z is independent
    of every external input.
    """
    tol = resolve_tolerance(tol)
    k = float(k)
    if not 0.0 <= k <= 1.0:
        raise ConfigError("flip rate k must lie in [0, 1]")
    loops = circuit.loop_labels
    histories, d = loop_histories(circuit)
    m = len(loops)
    ext_labels = histories[(0, 0)].labels
    dim = 2 ** len(ext_labels)
    num = np.zeros((dim, dim), dtype=complex)
    loop_num = np.zeros((d, d), dtype=complex)
    z = 0.0
    entries = []
    if floor:
        # The k/d term is an unconditional random reemission: the loop comes
        # out in |j> regardless of history, so the external register sees the
        # circuit with the entering state traced out rather than matched.
        for j in range(d):
            h = histories[(j, j)]
            traced = 0.0
            for l in range(d):
                g = histories[(j, l)]
                traced += g.norm**2
                num += (k / d) * np.outer(g.amps, g.amps.conj())
            w = (k / d) * traced + (1.0 - k) * h.norm**2
            z += w
            loop_num[j, j] += w
            num += (1.0 - k) * np.outer(h.amps, h.amps.conj())
            entries.append(ProjectionEntry("%d|%d" % (j, j), h, w))
    else:
        for (i, j), h in histories.items():
            flips = bin(i ^ j).count("1")
            w = (1.0 - k) ** (m - flips) * k**flips
            z += w * h.norm**2
            loop_num[i, i] += w * h.norm**2
            num += w * np.outer(h.amps, h.amps.conj())
            entries.append(ProjectionEntry("%d|%d" % (i, j), h, w * h.norm**2))
    if z < tol:
        raise ParadoxError("classical acceptance rate %.3e below tolerance" % z)
    if ext_labels and np.trace(num).real < tol:
        raise ParadoxError(
            "no external state survives any weighted classical history"
        )
    rho = _rho_from_matrix(num / z, ext_labels, circuit)
    return PostSelectionResult(
        model="classical", z=z, rho=rho,
        rho_loop=DensityOperator(loop_num / z, loops),
        projections=ProjectionSet(tuple(entries), loops),
        metadata={"k": k, "floor": bool(floor), "tolerance": tol},
    )


_FLAT_MEASURE = np.pi**2 / 4.0  # integral of |c_0|^2 |c_1|^2 over the flat measure


def _builtin_omega(name, d):
    if name == "flat":
        return np.full((d, d), 1.0 / d)
    if name == "quad":
        return (2.0 * np.eye(d) + 1.0) / (d + 2.0)
    if name == "delta":
        return np.eye(d)
    raise ConfigError("unknown weight-matrix built-in %r" % (name,))


def run_weight_matrix(circuit, omega="flat", tol=None):
    """Eigenstate-history channel with a weight matrix over history pairs.

    omega[i, j] weighs the history "loop emerges as e_i, returns as e_j".
    Built-ins: "flat" (all histories equal), "quad" (diagonal weighted 3:1),
    "delta" (diagonal only).  Custom matrices are normalized to sum d.

    The delta built-in on a single loop qubit uses the closed form of the
    continuous flat-measure boundary integral, which keeps the coherent cross
    terms between diagonal histories; its Z and rho match run_delta_quadrature
    exactly (measure constant 1).  On larger loop registers delta falls back
    to the incoherent diagonal sum.
    """
    tol = resolve_tolerance(tol)
    histories, d = loop_histories(circuit)
    ext_labels = histories[(0, 0)].labels
    dim = 2 ** len(ext_labels)
    name = omega if isinstance(omega, str) else "custom"
    coherent_delta = name == "delta" and d == 2
    if isinstance(omega, str):
        mat = _builtin_omega(omega, d)
    else:
        mat = np.asarray(omega, dtype=float)
        if mat.shape != (d, d):
            raise ConfigError("weight matrix must be %d x %d" % (d, d))
        if np.any(mat < 0):
            raise ConfigError("weight matrix entries must be nonnegative")
        total = mat.sum()
        if total <= 0:
            raise ConfigError("weight matrix must have positive total weight")
        mat = mat * (d / total)

    if coherent_delta:
        a00, a11 = histories[(0, 0)].amps, histories[(1, 1)].amps
        a01, a10 = histories[(0, 1)].amps, histories[(1, 0)].amps
        t = a00 + a11
        s_diag = np.vdot(a00, a00).real + np.vdot(a11, a11).real
        s_off = np.vdot(a01, a01).real + np.vdot(a10, a10).real
        z = _FLAT_MEASURE * (2.0 * s_diag + np.vdot(t, t).real + s_off)
        num = _FLAT_MEASURE * (
            2.0 * (np.outer(a00, a00.conj()) + np.outer(a11, a11.conj()))
            + np.outer(t, t.conj())
            + np.outer(a01, a01.conj())
            + np.outer(a10, a10.conj())
        )
    else:
        z = 0.0
        num = np.zeros((dim, dim), dtype=complex)
        for (i, j), h in histories.items():
            w = mat[i, j]
            if w == 0.0:
                continue
            z += w * h.norm**2
            num += w * np.outer(h.amps, h.amps.conj())
    if z < tol:
        raise ParadoxError("weighted acceptance rate %.3e below tolerance" % z)
    rho = _rho_from_matrix(num / z, ext_labels, circuit)
    return PostSelectionResult(
        model="weight_matrix", z=z, rho=rho,
        metadata={
            "omega": name,
            "coherent_delta": coherent_delta,
            "quadrature_measure_constant": 1.0 if coherent_delta else None,
            "tolerance": tol,
        },
    )


def flat_measure_nodes(n_theta, n_xi):
    """Nodes/weights for the flat measure on [0, pi] x [0, 2*pi].

    Gauss-Legendre in the polar angle, uniform (periodic trapezoid) in the
    phase.  Total weight is 2*pi^2.
    """
    if int(n_theta) < 1 or int(n_xi) < 1:
        raise ConfigError("quadrature node counts must be positive")
    x, w = np.polynomial.legendre.leggauss(int(n_theta))
    theta = (x + 1.0) * (np.pi / 2.0)
    w_theta = w * (np.pi / 2.0)
    xi = np.arange(int(n_xi)) * (2.0 * np.pi / int(n_xi))
    w_xi = np.full(int(n_xi), 2.0 * np.pi / int(n_xi))
    return theta, w_theta, xi, w_xi


def run_delta_quadrature(circuit, n_theta=64, n_xi=64, tol=None):
    """Continuous boundary condition on a single loop qubit, by quadrature.

    The loop emerges and returns as the same pure qubit state
    |phi> = cos(theta)|0> + e^{i xi} sin(theta)|1>, integrated over the flat
    measure.  Returns Z, the external density operator, and the loop-register
    density operator rho_loop = Z^-1 * integral of w(phi) |phi><phi|.
    """
    tol = resolve_tolerance(tol)
    loops = _require_loops(circuit)
    if len(loops) != 1:
        raise UnsupportedError(
            "continuous boundary quadrature supports exactly one loop qubit"
        )
    histories, _ = loop_histories(circuit)
    a = np.stack(
        [
            np.stack([histories[(0, 0)].amps, histories[(0, 1)].amps]),
            np.stack([histories[(1, 0)].amps, histories[(1, 1)].amps]),
        ]
    )  # shape (emerge, enter, ext)
    theta, w_theta, xi, w_xi = flat_measure_nodes(n_theta, n_xi)
    c0 = np.cos(theta)[:, None] * np.ones_like(xi)[None, :]
    c1 = np.sin(theta)[:, None] * np.exp(1j * xi)[None, :]
    phi = np.stack([c0, c1])  # (2, n_theta, n_xi)
    # history (i, j) carries amplitude c_i * conj(c_j) (emerge i, project j)
    coef = phi[:, None, :, :] * phi.conj()[None, :, :, :]
    psi = np.einsum("ijtx,ije->txe", coef, a)
    wgrid = w_theta[:, None] * w_xi[None, :]
    dens = np.einsum("txe,txe->tx", psi, psi.conj()).real
    z = float(np.sum(wgrid * dens))
    if z < tol:
        raise ParadoxError("quadrature acceptance rate %.3e below tolerance" % z)
    num = np.einsum("txe,txf,tx->ef", psi, psi.conj(), wgrid)
    rho = _rho_from_matrix(num / z, histories[(0, 0)].labels, circuit)
    loop_num = np.einsum("atx,btx,tx->ab", phi, phi.conj(), wgrid * dens)
    rho_loop = DensityOperator(loop_num / z, loops)
    return PostSelectionResult(
        model="delta_quadrature", z=z, rho=rho, rho_loop=rho_loop,
        metadata={
            "n_theta": int(n_theta), "n_xi": int(n_xi),
            "measure": "flat theta-xi on [0, pi] x [0, 2*pi]",
            "tolerance": tol,
        },
    )


def run_conditional(circuit, condition, deselect, mode, tol=None):
    """Conditional projection on the branch where a power condition holds.

    `condition` is a sequence of (channel, bit) pairs over external channels;
    the projection acts only on the branch matching all of them.  `deselect`
    is (labels, amplitudes): the component along that state is removed from
    the conditioned branch.  mode "coupled" renormalizes the whole
    wavefunction afterwards (the deselected weight is redistributed across
    both branches); mode "insulated" restores the conditioned branch to its
    pre-projection weight first, so the branch odds are untouched.
    """
    tol = resolve_tolerance(tol)
    if circuit.loop_labels:
        raise UnsupportedError(
            "conditional projection on a circuit with looped channels is not defined"
        )
    if mode not in ("coupled", "insulated"):
        raise ConfigError("mode must be 'coupled' or 'insulated'")
    state = evolve(circuit.initial_external_state(), circuit)
    n = state.n_qubits
    mask = np.ones(2**n, dtype=bool)
    for label, bit in condition:
        ax = state.axis(label)
        idx = (np.arange(2**n) >> (n - 1 - ax)) & 1
        mask &= idx == int(bit)
    on = PureState(np.where(mask, state.amps, 0.0), state.labels)
    off = PureState(np.where(mask, 0.0, state.amps), state.labels)
    w_on, w_off = on.norm**2, off.norm**2

    d_labels, d_amps = deselect
    d_amps = np.asarray(d_amps, dtype=complex)
    d_amps = d_amps / np.linalg.norm(d_amps)
    proj = np.eye(len(d_amps), dtype=complex) - np.outer(d_amps, d_amps.conj())
    on_sel = apply_gate(on, proj, tuple(d_labels))

    if mode == "coupled":
        final = PureState(off.amps + on_sel.amps, state.labels)
        z = final.norm**2
        if z < tol:
            raise ParadoxError("conditional projection removed all amplitude")
        unit = final.amps / final.norm
    else:
        if w_on > tol and on_sel.norm**2 < tol:
            raise ParadoxError(
                "insulated branch of weight %.3e has no surviving amplitude" % w_on
            )
        scaled = on_sel.amps * (np.sqrt(w_on) / on_sel.norm) if w_on > tol else on_sel.amps
        final = PureState(off.amps + scaled, state.labels)
        z = final.norm**2
        unit = final.amps / final.norm
    rho = _rho_from_matrix(np.outer(unit, unit.conj()), state.labels, circuit)
    return PostSelectionResult(
        model="conditional", z=z, rho=rho,
        metadata={"mode": mode, "branch_weight_on": w_on, "branch_weight_off": w_off,
                  "tolerance": tol},
    )


# ---------------------------------------------------------------------------
# Model descriptors (used by the catalog verifier and the CLI)

@dataclass(frozen=True)
class ExactBell:
    def run(self, circuit, tol=None):
        return run_exact_bell(circuit, tol=tol)

    def describe(self):
        return {"name": "exact_bell"}


@dataclass(frozen=True)
class NoisyBell:
    lam: float

    def run(self, circuit, tol=None):
        return run_noisy_bell(circuit, self.lam, tol=tol)

    def describe(self):
        return {"name": "noisy_bell", "lam": self.lam}


@dataclass(frozen=True)
class Classical:
    k: float
    floor: bool = False

    def run(self, circuit, tol=None):
        return run_classical(circuit, self.k, floor=self.floor, tol=tol)

    def describe(self):
        return {"name": "classical", "k": self.k, "floor": self.floor}


@dataclass(frozen=True)
class WeightMatrix:
    omega: object = "flat"

    def run(self, circuit, tol=None):
        return run_weight_matrix(circuit, self.omega, tol=tol)

    def describe(self):
        name = self.omega if isinstance(self.omega, str) else "custom"
        return {"name": "weight_matrix", "omega": name}


@dataclass(frozen=True)
class DeltaQuadrature:
    n_theta: int = 64
    n_xi: int = 64

    def run(self, circuit, tol=None):
        return run_delta_quadrature(circuit, self.n_theta, self.n_xi, tol=tol)

    def describe(self):
        return {"name": "delta_quadrature", "n_theta": self.n_theta, "n_xi": self.n_xi}


def run(circuit, model, tol=None):
    return model.run(circuit, tol=tol)
