"""Command-line harness: parse circuit documents, run models, emit reports.

Documents are JSON.  Reports are JSON with a fixed field order and Python's
shortest round-trip float formatting, so the same document and settings
always produce byte-identical output.  Exit codes: 0 on success, 2 when the
circuit is a paradox (no surviving amplitude; the projection outcomes are
still reported), 1 on any other error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, analysis
from .circuit import Channel, build_circuit
from .engine import (
    Classical,
    DeltaQuadrature,
    ExactBell,
    NoisyBell,
    WeightMatrix,
    projection_table,
    resolve_tolerance,
)
from .errors import (
    ConfigError,
    CtcSimError,
    ParadoxError,
    ParseError,
    UnsupportedError,
)
from .gates import make_gate
from .scenarios import build_scenario, list_scenarios

_DEFAULT_OUTPUTS = ("Z", "N", "rho", "projections")

_CONVENTIONS = {
    "rotation": "ROT(theta) = [[cos,-sin],[sin,cos]]",
    "pair_order": "(reference, loop) pairs in declaration order, then externals",
    "acceptance": "Z includes the 2^-m matched-pair normalization",
    "matrices": "row-major, complex entries as [re, im]",
}


def _fail(path, message):
    raise ConfigError("%s: %s" % (path, message))


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    extra = set(obj) - set(allowed)
    if extra:
        _fail(path, "unknown keys: %s" % ", ".join(sorted(extra)))


def _amps_from_pairs(values, path):
    if not isinstance(values, list) or len(values) % 2:
        _fail(path, "amplitude list must hold [re, im] pairs")
    flat = []
    for v in values:
        if not isinstance(v, (int, float)):
            _fail(path, "amplitude entries must be numbers")
        flat.append(float(v))
    return [complex(flat[i], flat[i + 1]) for i in range(0, len(flat), 2)]


def _parse_channels(items, path):
    if not isinstance(items, list) or not items:
        _fail(path, "expected a non-empty channel list")
    channels = []
    for i, item in enumerate(items):
        here = "%s[%d]" % (path, i)
        _check_keys(item, ("name", "role", "init"), here)
        name = item.get("name")
        role = item.get("role", "external")
        if role not in ("ctc", "external"):
            _fail(here + ".role", "must be 'ctc' or 'external'")
        init = item.get("init")
        if init is not None and role == "ctc":
            _fail(here + ".init", "looped channels carry no initial state")
        if isinstance(init, list):
            amps = _amps_from_pairs(init, here + ".init")
            if len(amps) != 2:
                _fail(here + ".init", "channel init must describe one qubit")
            init = tuple(amps)
        channels.append(Channel(name, looped=(role == "ctc"), init=init))
    return channels


def _parse_entangled(items, path):
    groups = []
    for i, item in enumerate(items):
        here = "%s[%d]" % (path, i)
        _check_keys(item, ("channels", "amplitudes"), here)
        labels = item.get("channels")
        if not isinstance(labels, list) or len(labels) < 2:
            _fail(here + ".channels", "expected two or more channel names")
        amps = _amps_from_pairs(item.get("amplitudes", []), here + ".amplitudes")
        groups.append((tuple(labels), np.array(amps, dtype=complex)))
    return groups


def _parse_gates(items, path):
    gates = []
    for i, item in enumerate(items):
        here = "%s[%d]" % (path, i)
        _check_keys(item, ("kind", "targets", "params"), here)
        kind = item.get("kind")
        targets = item.get("targets")
        if not isinstance(targets, list) or not targets:
            _fail(here + ".targets", "expected a list of channel names")
        raw = item.get("params", {})
        _check_keys(raw, ("theta", "xi"), here + ".params")
        params = tuple(float(v) for v in raw.values())
        try:
            gates.append(make_gate(kind, tuple(targets), params=params))
        except CtcSimError as err:
            _fail(here, str(err))
    return gates


_MODEL_KEYS = {
    "exact_bell": (),
    "noisy_bell": ("lambda",),
    "classical": ("k", "floor"),
    "weight_matrix": ("omega",),
    "delta": ("nodes_theta", "nodes_xi"),
}


def _parse_model(spec, path):
    if isinstance(spec, str):
        spec = {"type": spec}
    if not isinstance(spec, dict):
        _fail(path, "expected a model object")
    kind = spec.get("type")
    if kind not in _MODEL_KEYS:
        _fail(path + ".type", "unknown model %r (have: %s)"
              % (kind, ", ".join(sorted(_MODEL_KEYS))))
    _check_keys(spec, ("type",) + _MODEL_KEYS[kind], path)
    if kind == "exact_bell":
        return ExactBell()
    if kind == "noisy_bell":
        if "lambda" not in spec:
            _fail(path, "noisy_bell requires 'lambda'")
        return NoisyBell(float(spec["lambda"]))
    if kind == "classical":
        if "k" not in spec:
            _fail(path, "classical requires 'k'")
        return Classical(float(spec["k"]), floor=bool(spec.get("floor", False)))
    if kind == "weight_matrix":
        omega = spec.get("omega", "flat")
        if isinstance(omega, list):
            omega = np.array(omega, dtype=float)
        return WeightMatrix(omega)
    return DeltaQuadrature(
        n_theta=int(spec.get("nodes_theta", 64)),
        n_xi=int(spec.get("nodes_xi", 64)),
    )


def _parse_outputs(items, path):
    if not isinstance(items, list):
        _fail(path, "expected a list of output names")
    for name in items:
        if name in ("Z", "N", "rho", "projections"):
            continue
        if isinstance(name, str) and name.startswith(("flip:", "input_bias:")):
            continue
        _fail(path, "unknown output %r" % (name,))
    return tuple(items)


def parse_circuit_doc(text):
    """Parse a JSON circuit document into (circuit, model, outputs)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError("line %d: %s" % (err.lineno, err.msg)) from None
    _check_keys(doc, ("channels", "entangled_inits", "gates", "model", "outputs"),
                "doc")
    channels = _parse_channels(doc.get("channels"), "doc.channels")
    entangled = _parse_entangled(doc.get("entangled_inits", []),
                                 "doc.entangled_inits")
    gates = _parse_gates(doc.get("gates", []), "doc.gates")
    circuit = build_circuit(channels, gates, entangled=entangled)
    model = _parse_model(doc.get("model", "exact_bell"), "doc.model")
    outputs = _parse_outputs(doc.get("outputs", list(_DEFAULT_OUTPUTS)),
                             "doc.outputs")
    if isinstance(model, DeltaQuadrature) and len(circuit.loop_labels) != 1:
        raise UnsupportedError(
            "the delta model integrates a single looped qubit; this circuit "
            "has %d. Use model weight_matrix with omega='delta', or reduce "
            "to one looped channel." % len(circuit.loop_labels)
        )
    return circuit, model, outputs


# ---------------------------------------------------------------------------
# report serialization


def _matrix_dict(op):
    mat = np.asarray(op.mat)
    return {
        "dim": int(mat.shape[0]),
        "labels": list(op.labels),
        "entries": [[float(z.real), float(z.imag)] for z in mat.reshape(-1)],
    }


def _projection_rows(projections):
    return [
        {"label": e.label, "weight": float(e.weight)}
        for e in projections.entries
    ]


def _derived_outputs(circuit, model, result, outputs):
    derived = {}
    for name in outputs:
        if name.startswith("flip:"):
            parts = name[len("flip:"):].split(",")
            derived[name] = analysis.flip_probability(result, *parts)
        elif name.startswith("input_bias:"):
            channel = name[len("input_bias:"):]
            derived[name] = _matrix_dict(
                analysis.input_bias(circuit, channel, model)
            )
    return derived


def build_report(circuit, model, result, outputs):
    report = {}
    if "Z" in outputs:
        report["Z"] = float(result.z)
    if "N" in outputs:
        report["N"] = None if result.n is None else float(result.n)
    if "rho" in outputs:
        report["rho"] = _matrix_dict(result.rho)
    if "projections" in outputs:
        report["projections"] = (
            None if result.projections is None
            else _projection_rows(result.projections)
        )
    report["derived"] = _derived_outputs(circuit, model, result, outputs)
    report["metadata"] = {
        "measure": "flat-theta-xi",
        "conventions": dict(_CONVENTIONS),
        "version": __version__,
        "model": model.describe(),
        "tolerance": resolve_tolerance(None),
    }
    return report


def _paradox_report(err, circuit):
    projections = err.projections
    if projections is None and circuit is not None:
        try:
            projections = projection_table(circuit)
        except CtcSimError:
            projections = None
    return {
        "error": "paradox",
        "message": str(err),
        "projections": None if projections is None else projections.to_dict(),
        "metadata": {
            "measure": "flat-theta-xi",
            "conventions": dict(_CONVENTIONS),
            "version": __version__,
            "tolerance": resolve_tolerance(None),
        },
    }


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------------------
# verbs


def _run_and_report(circuit, model, outputs, out_path):
    try:
        result = model.run(circuit)
    except ParadoxError as err:
        _emit(_dump(_paradox_report(err, circuit)), out_path)
        return 2
    _emit(_dump(build_report(circuit, model, result, outputs)), out_path)
    return 0


def _cmd_run(args):
    with open(args.doc, encoding="utf-8") as fh:
        text = fh.read()
    circuit, model, outputs = parse_circuit_doc(text)
    if args.model:
        model = _parse_model(_model_from_arg(args.model), "arg.model")
    return _run_and_report(circuit, model, outputs, args.out)


def _model_from_arg(value):
    """'noisy_bell,lambda=0.2' -> {'type': 'noisy_bell', 'lambda': 0.2}"""
    head, *rest = value.split(",")
    spec = {"type": head}
    for item in rest:
        if "=" not in item:
            raise ConfigError("model argument %r is not key=value" % (item,))
        key, raw = item.split("=", 1)
        try:
            spec[key] = json.loads(raw)
        except json.JSONDecodeError:
            spec[key] = raw
    return spec


def _cmd_scenario(args):
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise ConfigError("--param %r is not key=value" % (item,))
        key, raw = item.split("=", 1)
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    scenario = build_scenario(args.name, **params)
    model = _parse_model(_model_from_arg(args.model), "arg.model")
    outputs = _parse_outputs(args.outputs.split(",") if args.outputs
                             else list(_DEFAULT_OUTPUTS), "arg.outputs")
    return _run_and_report(scenario.circuit, model, outputs, args.out)


def _sweep_documents(text, param, values):
    doc = json.loads(text)
    model_spec = doc.get("model", {"type": "exact_bell"})
    if isinstance(model_spec, str):
        model_spec = {"type": model_spec}
    in_model = param in _MODEL_KEYS.get(model_spec.get("type", ""), ())
    gate_hits = [
        g for g in doc.get("gates", [])
        if isinstance(g.get("params"), dict) and param in g["params"]
    ]
    if not in_model and not gate_hits:
        raise ConfigError(
            "sweep parameter %r is neither a model parameter nor a gate "
            "parameter of this document" % (param,)
        )
    for value in values:
        if in_model:
            model_spec[param] = value
            doc["model"] = model_spec
        for g in gate_hits:
            g["params"][param] = value
        yield json.dumps(doc)


def _cmd_sweep(args):
    if args.steps < 1:
        raise ConfigError("sweep needs at least one step")
    with open(args.doc, encoding="utf-8") as fh:
        text = fh.read()
    values = np.linspace(args.start, args.stop, args.steps)
    lines = ["%s\tZ\tN" % args.param]
    reports = []
    for value, doc_text in zip(values, _sweep_documents(text, args.param, values)):
        circuit, model, outputs = parse_circuit_doc(doc_text)
        row = {"param": args.param, "value": float(value)}
        try:
            result = model.run(circuit)
        except ParadoxError as err:
            row["report"] = _paradox_report(err, circuit)
            lines.append("%r\tparadox\tparadox" % float(value))
        else:
            row["report"] = build_report(circuit, model, result, outputs)
            n = result.n
            lines.append("%r\t%r\t%s" % (
                float(value), float(result.z),
                "" if n is None else repr(float(n)),
            ))
        reports.append(row)
    _emit("\n".join(lines) + "\n" + _dump(reports), args.out)
    return 0


def _cmd_list(args):
    _emit(_dump(list_scenarios()), args.out)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ctcsim",
        description="Run post-selected loop circuits and emit JSON reports.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a circuit document")
    p_run.add_argument("doc")
    p_run.add_argument("--model", help="override the document model, "
                       "e.g. noisy_bell,lambda=0.2")
    p_run.add_argument("--out")
    p_run.set_defaults(func=_cmd_run)

    p_sc = sub.add_parser("scenario", help="run a catalog scenario")
    p_sc.add_argument("name")
    p_sc.add_argument("--param", action="append",
                      help="override a scenario parameter, key=value")
    p_sc.add_argument("--model", default="exact_bell")
    p_sc.add_argument("--outputs", help="comma-separated output names")
    p_sc.add_argument("--out")
    p_sc.set_defaults(func=_cmd_scenario)

    p_sw = sub.add_parser("sweep", help="sweep one parameter of a document")
    p_sw.add_argument("doc")
    p_sw.add_argument("--param", required=True)
    p_sw.add_argument("--from", dest="start", type=float, required=True)
    p_sw.add_argument("--to", dest="stop", type=float, required=True)
    p_sw.add_argument("--steps", type=int, required=True)
    p_sw.add_argument("--out")
    p_sw.set_defaults(func=_cmd_sweep)

    p_ls = sub.add_parser("list-scenarios", help="list the scenario catalog")
    p_ls.add_argument("--out")
    p_ls.set_defaults(func=_cmd_list)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParadoxError as err:
        _emit(_dump(_paradox_report(err, None)), getattr(args, "out", None))
        return 2
    except CtcSimError as err:
        print("error: %s" % err, file=sys.stderr)
        return 1
    except OSError as err:
        print("error: %s" % err, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
