"""Command line front end: synth, verify, metrics, and slice subcommands.

Exit codes: 0 success, 2 parse/validation error, 3 distillation exhaustion,
4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analysis import AnalysisError, execution_schedule, lattice_cells_for, slice_layers
from .circuit import Gate, GateKind, InitBasis, ParseError, circuit as make_circuit
from .decompose import decompose_gates
from .document import FORMATS, build_document, canonical_json, export
from .icm import to_icm
from .pipeline import PipelineConfig, PipelineError, SparePolicy, run_pipeline
from .scheduling import BoxDim, DistillationExhausted, default_box_dims
from .sim import check_equivalence

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SYNTH = 3
EXIT_VERIFY = 4

DEFAULT_TOLERANCE = 1e-10


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("source", help="circuit source file")
    sub.add_argument("--config", help="JSON config file (flags take precedence)")
    sub.add_argument("--success-rate", type=float, dest="success_rate")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--spares-y", type=int, dest="spares_y")
    sub.add_argument("--spares-a", type=int, dest="spares_a")
    sub.add_argument("--spare-epsilon", type=float, dest="spare_epsilon")
    sub.add_argument("--distance", type=int, help="cube side d for volume metrics")
    sub.add_argument("--box-dims", dest="box_dims", help="JSON file with box spans")


def _load_box_dims(path: str) -> dict[InitBasis, BoxDim]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    dims = {}
    for key, spans in raw.items():
        state = InitBasis(key.lower())
        dims[state] = BoxDim(state, *spans)
    return dims


def build_config(args: argparse.Namespace) -> PipelineConfig:
    file_cfg: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return file_cfg.get(key, default)

    seed = args.seed
    if seed is None:
        seed = file_cfg.get("seed")
    if seed is None:
        seed = int(os.environ.get("TQEC_SEED", "0"))

    spares_y = pick(args.spares_y, "spares_y", None)
    spares_a = pick(args.spares_a, "spares_a", None)
    epsilon = pick(args.spare_epsilon, "spare_epsilon", 0.01)
    if spares_y is not None or spares_a is not None:
        policy = SparePolicy("explicit", y_count=spares_y or 0, a_count=spares_a or 0)
    else:
        policy = SparePolicy("binomial", epsilon=epsilon)

    box_dims = default_box_dims()
    dims_path = pick(args.box_dims, "box_dims", None)
    if dims_path:
        box_dims = _load_box_dims(dims_path)

    return PipelineConfig(
        success_rate=pick(args.success_rate, "success_rate", 1.0),
        seed=seed,
        spares=policy,
        box_dims=box_dims,
        cube_side=pick(args.distance, "distance", 1),
    )


def _read_source(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(data: bytes, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(out).write_bytes(data)


def cmd_synth(args: argparse.Namespace) -> int:
    config = build_config(args)
    try:
        result = run_pipeline(_read_source(args.source), config)
    except (ParseError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DistillationExhausted as exc:
        report = {"error": "distillation-exhausted", "detail": str(exc)}
        sys.stdout.buffer.write(canonical_json(report))
        return EXIT_SYNTH
    formats = args.format or ["json"]
    for idx, fmt in enumerate(formats):
        data = export(result, fmt)
        if args.out:
            path = args.out if len(formats) == 1 else f"{args.out}.{fmt}"
            _emit(data, path)
        else:
            _emit(data, None)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        from .circuit import parse_circuit, validate_circuit
        circ = parse_circuit(_read_source(args.source))
        diags = validate_circuit(circ)
        if diags:
            print(f"error: {diags[0].message}", file=sys.stderr)
            return EXIT_PARSE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    conv = to_icm(decompose_gates(circ))
    tol = args.tolerance
    per_kind: dict[GateKind, float] = {}
    for inst in conv.instances:
        if inst.kind not in per_kind:
            plain = make_circuit(1, [Gate(inst.kind, (0,))])
            per_kind[inst.kind] = check_equivalence(
                plain, to_icm(plain), trials=args.trials, seed=args.seed)
    identities: dict[str, float] = {}
    kinds = {g.kind for g in circ.gates}
    if GateKind.H in kinds or GateKind.TOFFOLI in kinds:
        import numpy as np
        from .decompose import toffoli_sequence
        from .sim import H_MATRIX, TOFFOLI_MATRIX, gate_matrix, to_unitary
        if GateKind.H in kinds:
            pvp = gate_matrix(GateKind.P) @ gate_matrix(GateKind.V) @ gate_matrix(GateKind.P)
            identities["h_equals_pvp"] = float(np.max(np.abs(pvp - H_MATRIX)))
        if GateKind.TOFFOLI in kinds:
            u = to_unitary(make_circuit(3, toffoli_sequence(0, 1, 2)))
            fid = abs(np.trace(TOFFOLI_MATRIX.conj().T @ u)) / 8
            identities["toffoli_sequence"] = float(1 - fid ** 2)

    instances = [
        {"gate": inst.kind.value, "qubit": inst.qubit,
         "max_infidelity": per_kind[inst.kind]}
        for inst in conv.instances
    ]
    worst = max(
        [rec["max_infidelity"] for rec in instances] + list(identities.values()),
        default=0.0,
    )
    report = {
        "instances": instances,
        "identities": identities,
        "max_infidelity": worst,
        "tolerance": tol,
        "pass": worst <= tol,
    }
    sys.stdout.buffer.write(canonical_json(report))
    return EXIT_OK if worst <= tol else EXIT_VERIFY


def cmd_metrics(args: argparse.Namespace) -> int:
    config = build_config(args)
    try:
        result = run_pipeline(_read_source(args.source), config)
    except (ParseError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DistillationExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SYNTH
    doc = build_document(result)
    sys.stdout.buffer.write(canonical_json(doc["reports"]))
    return EXIT_OK


def cmd_slice(args: argparse.Namespace) -> int:
    config = build_config(args)
    try:
        result = run_pipeline(_read_source(args.source), config)
    except (ParseError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DistillationExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SYNTH
    if args.cells:
        cells = tuple(args.cells)
    else:
        cells = lattice_cells_for(result.geometry)
    try:
        layers = slice_layers(result.geometry, cells)
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    stream = execution_schedule(layers)
    lines = []
    for ins in stream:
        record = {
            "op": ins.op.value,
            "layers": [
                {
                    "index": idx,
                    "kind": layers[idx].kind.value,
                    "t": layers[idx].t,
                    "extent": list(layers[idx].extent),
                    "default_basis": "x",
                    "marked": [[i, j, basis.value]
                               for (i, j), basis in layers[idx].marked],
                }
                for idx in ins.layers
            ],
        }
        lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
    _emit(("\n".join(lines) + "\n").encode("ascii"), args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="tqecsynth")
    subs = parser.add_subparsers(dest="command", required=True)

    synth = subs.add_parser("synth", help="synthesise a geometry document")
    _add_config_flags(synth)
    synth.add_argument("--out", help="output path ('-' for stdout)")
    synth.add_argument("--format", action="append", choices=FORMATS,
                       help="output format (repeatable; default json)")
    synth.set_defaults(func=cmd_synth)

    verify = subs.add_parser("verify", help="oracle checks for every template used")
    verify.add_argument("source")
    verify.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    verify.add_argument("--trials", type=int, default=4)
    verify.add_argument("--seed", type=int, default=7)
    verify.set_defaults(func=cmd_verify)

    metrics = subs.add_parser("metrics", help="distance/volume/bbox reports")
    _add_config_flags(metrics)
    metrics.set_defaults(func=cmd_metrics)

    slice_cmd = subs.add_parser("slice", help="layer stream as JSON lines")
    _add_config_flags(slice_cmd)
    slice_cmd.add_argument("--cells", type=int, nargs=3,
                           metavar=("I", "J", "T"), help="lattice extent in cells")
    slice_cmd.add_argument("--out", help="output path ('-' for stdout)")
    slice_cmd.set_defaults(func=cmd_slice)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
