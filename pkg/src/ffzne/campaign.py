"""Grid campaigns: run the mitigation pipeline over circuit sizes and layout-search strategies."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ffzne.circuit import (
    Circuit,
    cliffordize,
    gen_efficient_su2,
    gen_hamiltonian_sim,
    gen_mirrored_brickwork,
    interaction_graph,
)
from ffzne.device import DeviceGenSpec, DeviceModel, generate_device, load_device
from ffzne.layout import enumerate_layouts, truncate_by_overlap
from ffzne.mitigation import ExtrapolationError, run_ffzne, run_folded_zne
from ffzne.scoring import InsufficientLayoutsError
from ffzne.selection import SelectionError

FAMILIES = ("su2", "hamsim", "brickwork")
STRATEGIES = ("exhaustive", "binary", "truncated-exhaustive", "truncated-binary")

# Rotation angles below pi/4 snap to the identity, which keeps the Cliffordized
# ansatz ideal at exactly 1.
IDENTITY_SNAP_SCALE = math.pi / 4

SUMMARY_COLUMNS = (
    "family",
    "n",
    "reps",
    "method",
    "score_method",
    "strategy",
    "estimate",
    "ideal",
    "deviation_pct",
    "unmitigated",
    "unmitigated_deviation_pct",
    "delta",
    "probes",
    "select_time",
    "layout_count",
    "executions",
    "error_code",
    "error",
)


class CampaignError(ValueError):
    pass


def stable_seed(*parts) -> int:
    """Seed derived from the campaign seed and a cell label; independent of grid order."""
    digest = hashlib.sha256("|".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def build_circuit(family: str, n: int, reps: int, seed: int = 0, angle_scale: float = 2 * math.pi) -> Circuit:
    """Benchmark circuit for a family; ``reps`` is repetitions, Trotter steps or 2q depth."""
    if family == "su2":
        return cliffordize(gen_efficient_su2(n, reps, seed=seed, angle_scale=angle_scale))
    if family == "hamsim":
        return cliffordize(gen_hamiltonian_sim(n, reps))
    if family == "brickwork":
        return gen_mirrored_brickwork(n, reps, seed=seed)
    raise CampaignError(f"unknown circuit family {family!r}; expected one of {FAMILIES}")


@dataclass
class CampaignSpec:
    out_dir: str
    ns: list[int]
    reps: list[int]
    family: str = "su2"
    device: dict | str = field(default_factory=dict)
    score_methods: list[str] = field(default_factory=lambda: ["fidelity-product"])
    strategies: list[str] = field(default_factory=lambda: ["binary"])
    a: float = 0.1
    eta: int = 10
    eps: float = 0.0
    shots: int = 0
    seed: int = 0
    angle_scale: float = IDENTITY_SNAP_SCALE
    baseline_lambdas: list[float] | None = None
    baseline_extrapolator: str = "linear"
    record_timings: bool = True

    def validate(self) -> None:
        if not self.ns or not self.reps:
            raise CampaignError("campaign grid is empty: need at least one n and one reps value")
        if not self.score_methods or not self.strategies:
            raise CampaignError("campaign needs at least one score method and one strategy")
        if self.family not in FAMILIES:
            raise CampaignError(f"unknown circuit family {self.family!r}")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise CampaignError(f"unknown strategies {bad}; expected a subset of {STRATEGIES}")
        if isinstance(self.device, str) and not Path(self.device).is_file():
            raise CampaignError(f"device file not found: {self.device}")
        if isinstance(self.device, dict):
            unknown = set(self.device) - set(DeviceGenSpec.__dataclass_fields__)
            if unknown:
                raise CampaignError(f"unknown device fields: {sorted(unknown)}")
        if self.shots < 0:
            raise CampaignError("shots must be >= 0")

    def load_device(self) -> DeviceModel:
        if isinstance(self.device, str):
            return load_device(self.device)
        params = dict(self.device)
        if "dims" in params:
            params["dims"] = tuple(params["dims"])
        return generate_device(DeviceGenSpec(**params))

    @classmethod
    def from_dict(cls, data: dict) -> CampaignSpec:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise CampaignError(f"unknown campaign fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise CampaignError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> CampaignSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class CampaignResult:
    out_dir: Path
    rows: list[dict]
    reports: list[dict]

    @property
    def summary_path(self) -> Path:
        return self.out_dir / "summary.csv"


def error_code(exc: Exception) -> str:
    if isinstance(exc, InsufficientLayoutsError):
        return "insufficient-layouts"
    if isinstance(exc, SelectionError):
        return "selection"
    if isinstance(exc, ExtrapolationError):
        return "extrapolation"
    if isinstance(exc, ValueError):
        return "invalid"
    return "internal"


def strip_timings(report: dict) -> dict:
    """Zero every wall-clock field so repeated runs write identical bytes."""
    report = json.loads(json.dumps(report))
    report["timings"] = {k: 0.0 for k in report.get("timings", {})}
    if report.get("triple"):
        report["triple"]["wall_time"] = 0.0
    return report


def _row(spec: CampaignSpec, n: int, reps: int, score_method: str, strategy: str, report: dict | None) -> dict:
    row = dict.fromkeys(SUMMARY_COLUMNS, "")
    row.update(family=spec.family, n=n, reps=reps, score_method=score_method, strategy=strategy)
    if report is None:
        return row
    triple = report.get("triple") or {}
    row.update(
        method=report["method"],
        estimate=report["estimate"],
        ideal=report["ideal"],
        deviation_pct=report["deviation_pct"],
        unmitigated=report["unmitigated"],
        unmitigated_deviation_pct=report["unmitigated_deviation_pct"],
        delta=triple.get("delta", ""),
        probes=triple.get("probes", ""),
        select_time=triple.get("wall_time", ""),
        layout_count=report["layout_count"],
        executions=report["executions"],
        error_code="extrapolation" if report.get("error") else "",
        error=report.get("error") or "",
    )
    return {k: ("" if v is None else v) for k, v in row.items()}


def run_cell(spec: CampaignSpec, n: int, reps: int) -> list[tuple[str, dict, dict | None]]:
    """All (score method x strategy) runs of one grid cell, plus the optional baseline."""
    out: list[tuple[str, dict, dict | None]] = []
    label = f"{spec.family}-n{n}-r{reps}"
    try:
        device = spec.load_device()
        circuit = build_circuit(spec.family, n, reps, stable_seed(spec.seed, "circuit", label), spec.angle_scale)
        full = enumerate_layouts(interaction_graph(circuit), device, circuit_hash=circuit.digest())
        truncated = truncate_by_overlap(full, spec.eta, device.num_qubits) if any(
            s.startswith("truncated") for s in spec.strategies
        ) else None
    except Exception as exc:  # recorded per cell; the campaign continues
        for method in spec.score_methods:
            for strategy in spec.strategies:
                row = _row(spec, n, reps, method, strategy, None)
                row.update(error_code=error_code(exc), error=str(exc))
                out.append((f"{label}-{method}-{strategy}", row, None))
        return out

    best_layout = None
    for method in spec.score_methods:
        exec_seed = stable_seed(spec.seed, "exec", label, method)
        for strategy in spec.strategies:
            name = f"{label}-{method}-{strategy}"
            layouts = truncated if strategy.startswith("truncated") else full
            try:
                report = run_ffzne(
                    circuit,
                    device,
                    score_method=method,
                    selection_strategy=strategy.removeprefix("truncated-"),
                    a=spec.a,
                    shots=spec.shots,
                    seed=exec_seed,
                    eps=spec.eps,
                    eta=spec.eta if strategy.startswith("truncated") else None,
                    score_shots=spec.shots,
                    layouts=layouts,
                )
            except Exception as exc:
                row = _row(spec, n, reps, method, strategy, None)
                row.update(error_code=error_code(exc), error=str(exc))
                out.append((name, row, None))
                continue
            report.meta.update(family=spec.family, n=n, reps=reps, strategy=strategy)
            doc = report.to_dict()
            if not spec.record_timings:
                doc = strip_timings(doc)
            if best_layout is None:
                best_layout = report.triple.l1
            out.append((name, _row(spec, n, reps, method, strategy, doc), doc))

    if spec.baseline_lambdas and best_layout is not None:
        name = f"{label}-zne"
        try:
            report = run_folded_zne(
                circuit,
                device,
                best_layout,
                spec.baseline_lambdas,
                spec.baseline_extrapolator,
                shots=spec.shots,
                seed=stable_seed(spec.seed, "zne", label),
            )
            report.meta.update(family=spec.family, n=n, reps=reps)
            doc = report.to_dict()
            if not spec.record_timings:
                doc = strip_timings(doc)
            out.append((name, _row(spec, n, reps, "", "zne", doc), doc))
        except Exception as exc:
            row = _row(spec, n, reps, "", "zne", None)
            row.update(method="zne", error_code=error_code(exc), error=str(exc))
            out.append((name, row, None))
    return out


def _cell_job(args: tuple[dict, int, int]) -> list[tuple[str, dict, dict | None]]:
    spec_dict, n, reps = args
    return run_cell(CampaignSpec.from_dict(spec_dict), n, reps)


def resolve_jobs(jobs: int | None) -> int:
    env = os.environ.get("FFZNE_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise CampaignError(f"FFZNE_JOBS must be an integer, got {env!r}") from exc
    return max(1, jobs or 1)


def write_summary(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def run_campaign(spec: CampaignSpec, jobs: int | None = None) -> CampaignResult:
    """Run every grid cell, write per-cell report JSON and ``summary.csv`` in grid order."""
    spec.validate()
    out_dir = Path(spec.out_dir)
    (out_dir / "cells").mkdir(parents=True, exist_ok=True)
    grid = [(n, r) for n in spec.ns for r in spec.reps]
    workers = resolve_jobs(jobs)
    if workers > 1 and len(grid) > 1:
        payload = asdict(spec)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, [(payload, n, r) for n, r in grid]))
    else:
        results = [run_cell(spec, n, r) for n, r in grid]

    rows: list[dict] = []
    reports: list[dict] = []
    for cell in results:
        for name, row, doc in cell:
            rows.append(row)
            if doc is not None:
                reports.append(doc)
                (out_dir / "cells" / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
    write_summary(rows, out_dir / "summary.csv")
    return CampaignResult(out_dir, rows, reports)
