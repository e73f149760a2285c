"""Command-line front end: ``ffzne <group> <command> [options]``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from ffzne.campaign import CampaignError, CampaignSpec, build_circuit, resolve_jobs, run_campaign, strip_timings
from ffzne.circuit import CircuitError, cliffordize, interaction_graph, load_circuit, load_circuit_meta, save_circuit
from ffzne.device import DeviceGenSpec, DeviceSchemaError, DeviceValidationError, generate_device, load_device, save_device
from ffzne.layout import LayoutSet, enumerate_layouts, load_layouts, save_layouts, truncate_by_overlap
from ffzne.mitigation import ExtrapolationError, run_ffzne, run_folded_zne
from ffzne.report import emit_plot_data, flatten_reports, load_reports
from ffzne.scoring import InsufficientLayoutsError, filter_scores, load_scores, save_scores, score_layouts
from ffzne.selection import SelectionError, select
from ffzne.sim.expval import NoiseModel, expval, make_observable

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PIPELINE = 3

PIPELINE_ERRORS = (InsufficientLayoutsError, SelectionError, ExtrapolationError, RuntimeError)
VALIDATION_ERRORS = (
    DeviceSchemaError,
    DeviceValidationError,
    CircuitError,
    CampaignError,
    FileNotFoundError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
)
SCORE_ALIASES = {"fp": "fidelity-product", "mapomatic": "fidelity-product", "qic": "qic"}
OBSERVABLES = {"zw1": 1, "zw2": 2, "zw3": 3}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _resolve_layout(spec: str, layouts_path: str | None) -> tuple[int, ...]:
    """A layout given inline (``3,7,12``) or as an index into a layouts file."""
    if "," in spec or layouts_path is None:
        return tuple(int(v) for v in spec.split(","))
    layouts = load_layouts(layouts_path)
    k = int(spec)
    if not 0 <= k < len(layouts):
        raise ValueError(f"layout index {k} out of range for {len(layouts)} layouts")
    return layouts[k]


def _report_out(report, args) -> None:
    doc = report.to_dict()
    if args.no_timings:
        doc = strip_timings(doc)
    if args.format == "csv":
        _emit(flatten_reports([doc]), args.output)
    else:
        _emit(_json(doc), args.output)


# --- handlers ---------------------------------------------------------------


def cmd_device_gen(args) -> int:
    if args.topology in ("heavy-hex", "grid"):
        dims = (args.rows, args.cols)
    else:
        if args.n is None:
            raise ValueError(f"--n is required for topology {args.topology}")
        dims = (args.n,)
    spec = DeviceGenSpec(
        topology=args.topology,
        dims=dims,
        eps2=args.eps2,
        sigma2=args.sigma,
        eps1=args.eps1,
        sigma1=args.sigma1 if args.sigma1 is not None else args.sigma,
        dead_fraction=args.dead_fraction,
        seed=args.seed,
        name=args.name,
    )
    device = generate_device(spec)
    if args.output:
        save_device(device, args.output)
    else:
        _emit(_json(device.to_dict()), None)
    return EXIT_OK


def cmd_device_validate(args) -> int:
    device = load_device(args.device)
    degrees = [device.degree(q) for q in range(device.num_qubits)]
    summary = {
        "valid": True,
        "name": device.name,
        "num_qubits": device.num_qubits,
        "num_edges": len(device.edges),
        "max_degree": max(degrees, default=0),
    }
    _emit(_json(summary), args.output)
    return EXIT_OK


def cmd_circuit_gen(args) -> int:
    from ffzne.circuit import gen_efficient_su2, gen_hamiltonian_sim, gen_mirrored_brickwork

    if args.family == "su2":
        circuit = gen_efficient_su2(args.n, args.reps, seed=args.seed, angle_scale=args.angle_scale)
    elif args.family == "hamsim":
        circuit = gen_hamiltonian_sim(args.n, args.reps, dt=args.dt)
    else:
        circuit = gen_mirrored_brickwork(args.n, args.reps, seed=args.seed)
    meta = {"family": args.family, "n": args.n, "reps": args.reps, "seed": args.seed}
    if args.output:
        save_circuit(circuit, args.output, meta)
    else:
        _emit(_json({**circuit.to_dict(), "meta": meta}), None)
    return EXIT_OK


def cmd_circuit_cliffordize(args) -> int:
    circuit = cliffordize(load_circuit(args.input))
    meta = load_circuit_meta(args.input)
    if meta:
        meta["cliffordized"] = True
    save_circuit(circuit, args.output, meta)
    return EXIT_OK


def cmd_layouts_enum(args) -> int:
    circuit = load_circuit(args.circuit)
    device = load_device(args.device)
    layouts = enumerate_layouts(interaction_graph(circuit), device, cap=args.cap, circuit_hash=circuit.digest())
    if args.eta is not None:
        layouts = truncate_by_overlap(layouts, args.eta, device.num_qubits)
    if args.output:
        save_layouts(layouts, args.output)
    else:
        _emit(json.dumps(layouts.to_dict()) + "\n", None)
    return EXIT_OK


def cmd_layouts_score(args) -> int:
    circuit = load_circuit(args.circuit)
    device = load_device(args.device)
    layouts = load_layouts(args.layouts)
    table = score_layouts(circuit, layouts, device, SCORE_ALIASES[args.method], args.shots, args.seed)
    if args.format == "csv":
        rows = "".join(f"{' '.join(map(str, e.layout))},{e.score!r}\n" for e in table.entries)
        _emit("layout,score\n" + rows, args.output)
    elif args.output:
        save_scores(table, args.output)
    else:
        _emit(json.dumps(table.to_dict()) + "\n", None)
    return EXIT_OK


def cmd_layouts_select(args) -> int:
    table = load_scores(args.scores)
    if not args.no_filter:
        table = filter_scores(table)
    triple = select(table, args.strategy, a=args.a, eps=args.eps)
    doc = triple.to_dict()
    if args.no_timings:
        doc["wall_time"] = 0.0
    _emit(_json(doc), args.output)
    return EXIT_OK


def cmd_expval(args) -> int:
    circuit = load_circuit(args.circuit)
    device = load_device(args.device)
    layout = _resolve_layout(args.layout, args.layouts)
    observable = make_observable(circuit.num_qubits, OBSERVABLES[args.observable])
    est = expval(circuit, layout, device, NoiseModel.per_gate(), observable, args.shots, args.seed)
    doc = {**est.to_dict(), "layout": list(layout), "observable": args.observable}
    if args.format == "csv":
        _emit(f"mean,stderr,shots,mode\n{est.mean!r},{est.stderr!r},{est.shots},{est.mode}\n", args.output)
    else:
        _emit(_json(doc), args.output)
    return EXIT_OK


def cmd_run_ffzne(args) -> int:
    circuit = load_circuit(args.circuit)
    device = load_device(args.device)
    layouts = load_layouts(args.layouts) if args.layouts else None
    report = run_ffzne(
        circuit,
        device,
        score_method=SCORE_ALIASES[args.score],
        selection_strategy=args.strategy,
        a=args.a,
        shots=args.shots,
        seed=args.seed,
        observable=make_observable(circuit.num_qubits, OBSERVABLES[args.observable]),
        eta=args.eta,
        eps=args.eps,
        cap=args.cap,
        score_shots=args.score_shots,
        weighted=args.weighted,
        layouts=layouts,
    )
    report.meta.update(load_circuit_meta(args.circuit))
    if report.error:
        _report_out(report, args)
        raise ExtrapolationError(report.error)
    _report_out(report, args)
    return EXIT_OK


def cmd_run_zne(args) -> int:
    circuit = load_circuit(args.circuit)
    device = load_device(args.device)
    if args.layout:
        layout = _resolve_layout(args.layout, args.layouts)
    else:
        layouts = enumerate_layouts(interaction_graph(circuit), device, cap=args.cap)
        table = filter_scores(score_layouts(circuit, layouts, device))
        layout = table.entries[0].layout
    report = run_folded_zne(
        circuit,
        device,
        layout,
        args.lambdas,
        "exponential" if args.extrapolator == "exp" else args.extrapolator,
        shots=args.shots,
        seed=args.seed,
        observable=make_observable(circuit.num_qubits, OBSERVABLES[args.observable]),
    )
    report.meta.update(load_circuit_meta(args.circuit))
    _report_out(report, args)
    if report.error:
        raise ExtrapolationError(report.error)
    return EXIT_OK


def cmd_campaign_run(args) -> int:
    spec = CampaignSpec.load(args.spec)
    if args.out_dir:
        spec.out_dir = args.out_dir
    if args.no_timings:
        spec.record_timings = False
    if "seed" in args.explicit:
        spec.seed = args.seed
    result = run_campaign(spec, jobs=args.jobs)
    failed = sum(1 for r in result.rows if r["error_code"])
    summary = {"out_dir": str(result.out_dir), "cells": len(result.rows), "failed": failed}
    sys.stdout.write(_json(summary))
    return EXIT_OK


def cmd_report_csv(args) -> int:
    _emit(flatten_reports(load_reports(args.reports)), args.output)
    return EXIT_OK


def cmd_report_plotdata(args) -> int:
    paths = emit_plot_data(load_reports(args.reports), args.out_dir)
    sys.stdout.write(_json({k: str(v) for k, v in paths.items()}))
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    """Global flags, accepted both before and after the subcommand."""
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--jobs", type=int, help="worker processes; FFZNE_JOBS overrides")
    p.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    p.add_argument("--no-timings", action="store_true", help="zero wall-clock fields for reproducible bytes")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="ffzne", description=__doc__, parents=[common])
    groups = parser.add_subparsers(dest="group", required=True)

    def leaf(sub, name: str, handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    # device
    dev = groups.add_parser("device", help="synthetic device models").add_subparsers(dest="cmd", required=True)
    p = leaf(dev, "gen", cmd_device_gen, "generate a seeded device")
    p.add_argument("--topology", choices=("heavy-hex", "grid", "line", "ring"), default="heavy-hex")
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--cols", type=int, default=3)
    p.add_argument("--n", type=int, help="qubit count for line and ring topologies")
    p.add_argument("--eps2", type=float, default=0.01, help="median two-qubit error")
    p.add_argument("--eps1", type=float, default=0.001, help="median one-qubit error")
    p.add_argument("--sigma", type=float, default=0.5, help="log-normal dispersion")
    p.add_argument("--sigma1", type=float, help="one-qubit dispersion (defaults to --sigma)")
    p.add_argument("--dead-fraction", type=float, default=0.0)
    p.add_argument("--name")
    p.add_argument("-o", "--output")
    p = leaf(dev, "validate", cmd_device_validate, "check a device file")
    p.add_argument("device", nargs="?")
    p.add_argument("-i", "--device", dest="device_opt")
    p.add_argument("-o", "--output")

    # circuit
    circ = groups.add_parser("circuit", help="benchmark circuits").add_subparsers(dest="cmd", required=True)
    p = leaf(circ, "gen", cmd_circuit_gen, "generate a benchmark circuit")
    p.add_argument("--family", choices=("su2", "hamsim", "brickwork"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=1, help="repetitions, Trotter steps or 2q depth")
    p.add_argument("--angle-scale", type=float, default=2 * math.pi, help="su2 angles drawn from [0, scale)")
    p.add_argument("--dt", type=float, default=0.1, help="hamsim time step")
    p.add_argument("-o", "--output")
    p = leaf(circ, "cliffordize", cmd_circuit_cliffordize, "snap rotations to Clifford angles")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)

    # layouts
    lay = groups.add_parser("layouts", help="isomorphic layouts").add_subparsers(dest="cmd", required=True)
    p = leaf(lay, "enum", cmd_layouts_enum, "enumerate isomorphic layouts")
    p.add_argument("--device", required=True)
    p.add_argument("--circuit", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("--eta", type=int, help="overlap truncation threshold")
    p.add_argument("-o", "--output")
    p = leaf(lay, "score", cmd_layouts_score, "score layouts")
    p.add_argument("--method", choices=tuple(SCORE_ALIASES), default="fp")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--device", required=True)
    p.add_argument("--circuit", required=True)
    p.add_argument("--layouts", required=True)
    p.add_argument("-o", "--output")
    p = leaf(lay, "select", cmd_layouts_select, "select a layout triple")
    p.add_argument("--strategy", choices=("exhaustive", "binary"), default="binary")
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--scores", required=True)
    p.add_argument("--no-filter", action="store_true", help="skip the score filter")
    p.add_argument("-o", "--output")

    # expval
    p = leaf(groups, "expval", cmd_expval, "noisy expectation value on one layout")
    p.add_argument("--circuit", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--layout", required=True, help="index into --layouts, or comma-separated qubits")
    p.add_argument("--layouts")
    p.add_argument("--observable", choices=tuple(OBSERVABLES), default="zw1")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("-o", "--output")

    # run
    run = groups.add_parser("run", help="mitigation pipelines").add_subparsers(dest="cmd", required=True)
    p = leaf(run, "ffzne", cmd_run_ffzne, "layout-based zero-noise extrapolation")
    p.add_argument("--circuit", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--score", choices=tuple(SCORE_ALIASES), default="fp")
    p.add_argument("--strategy", choices=("exhaustive", "binary"), default="binary")
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--eta", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--layouts", help="precomputed layouts file")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--score-shots", type=int, default=0, help="QIC shots (0 = exact)")
    p.add_argument("--weighted", action="store_true", help="inverse-variance weights (sampled mode)")
    p.add_argument("--observable", choices=tuple(OBSERVABLES), default="zw1")
    p.add_argument("-o", "--output")
    p = leaf(run, "zne", cmd_run_zne, "folded zero-noise extrapolation baseline")
    p.add_argument("--circuit", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--lambdas", type=_float_list, default=[1.0, 3.0, 5.0])
    p.add_argument("--extrapolator", choices=("linear", "exp", "exponential", "richardson2"), default="linear")
    p.add_argument("--layout", help="index into --layouts or comma-separated qubits (default: best-scored)")
    p.add_argument("--layouts")
    p.add_argument("--cap", type=int)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--observable", choices=tuple(OBSERVABLES), default="zw1")
    p.add_argument("-o", "--output")

    # campaign
    camp = groups.add_parser("campaign", help="grid experiments").add_subparsers(dest="cmd", required=True)
    p = leaf(camp, "run", cmd_campaign_run, "run a campaign spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir")

    # report
    rep = groups.add_parser("report", help="report post-processing").add_subparsers(dest="cmd", required=True)
    p = leaf(rep, "csv", cmd_report_csv, "flatten report JSON files to CSV")
    p.add_argument("reports", nargs="+")
    p.add_argument("-o", "--output")
    p = leaf(rep, "plotdata", cmd_report_plotdata, "emit plot-data CSVs")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out-dir", required=True)
    return parser


def _finalize(args: argparse.Namespace) -> argparse.Namespace:
    explicit = {k for k in ("seed", "jobs", "format", "no_timings") if hasattr(args, k)}
    args.explicit = explicit
    args.seed = getattr(args, "seed", 0)
    args.jobs = resolve_jobs(getattr(args, "jobs", 1))
    args.format = getattr(args, "format", "json")
    args.no_timings = getattr(args, "no_timings", False)
    if getattr(args, "device_opt", None):
        args.device = args.device_opt
    if args.handler is cmd_device_validate and not args.device:
        raise ValueError("device validate needs a device file")
    return args


def _fail(exc: BaseException, code: int) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(doc) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _finalize(args)
        return args.handler(args)
    except PIPELINE_ERRORS as exc:
        return _fail(exc, EXIT_PIPELINE)
    except VALIDATION_ERRORS as exc:
        return _fail(exc, EXIT_VALIDATION)


if __name__ == "__main__":
    sys.exit(main())
