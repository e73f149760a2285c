"""Layout noise scores (fidelity product and quality-indicator circuits) and score filtering."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ffzne.circuit import Circuit, Gate, interaction_graph
from ffzne.device import DeviceModel
from ffzne.layout import Layout, LayoutSet
from ffzne.sim.expval import (
    NoiseModel,
    all_z_strings,
    exact_zero_probability,
    heisenberg_paths,
    noise_sites,
    sample_bitstrings,
    site_probability_matrix,
)

SCORE_ONE = 0.999
METHODS = ("fidelity-product", "qic")


class InsufficientLayoutsError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScoredLayout:
    layout: Layout
    score: float
    method: str = "fidelity-product"


@dataclass(frozen=True)
class ScoreTable:
    """Entries sorted ascending by score; ties keep canonical layout order."""

    entries: tuple[ScoredLayout, ...]
    mean: float
    stddev: float
    method: str = "fidelity-product"
    _scores: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        scores = np.array([e.score for e in self.entries], dtype=float)
        scores.setflags(write=False)
        object.__setattr__(self, "_scores", scores)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def scores(self) -> np.ndarray:
        return self._scores

    @property
    def layouts(self) -> list[Layout]:
        return [e.layout for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "entries": [{"layout": list(e.layout), "score": e.score} for e in self.entries],
            "mean": self.mean,
            "stddev": self.stddev,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ScoreTable:
        method = data.get("method", "fidelity-product")
        entries = [ScoredLayout(tuple(e["layout"]), float(e["score"]), method) for e in data["entries"]]
        return build_table(entries, method) if entries else cls((), math.nan, math.nan, method)


def save_scores(table: ScoreTable, path: str | Path) -> None:
    Path(path).write_text(json.dumps(table.to_dict()) + "\n")


def load_scores(path: str | Path) -> ScoreTable:
    return ScoreTable.from_dict(json.loads(Path(path).read_text()))


def build_table(entries: Iterable[ScoredLayout], method: str | None = None) -> ScoreTable:
    entries = sorted(entries, key=lambda e: (e.score, e.layout))
    scores = np.array([e.score for e in entries])
    mean = float(scores.mean()) if len(scores) else math.nan
    std = float(scores.std()) if len(scores) else math.nan
    return ScoreTable(tuple(entries), mean, std, method or (entries[0].method if entries else "fidelity-product"))


def _gate_errors(circuit: Circuit, layout: Sequence[int], device: DeviceModel) -> list[float]:
    errs = []
    for g in circuit.gates:
        if g.kind == "Barrier":
            continue
        if g.kind == "CX":
            a, b = layout[g.qubits[0]], layout[g.qubits[1]]
            if not device.has_edge(a, b):
                raise AssertionError(f"layout maps {g} onto non-edge {(a, b)}")
            errs.append(device.edge_error(a, b))
        else:
            errs.append(device.one_qubit_error[layout[g.qubits[0]]])
    return errs


def score_fidelity_product(circuit: Circuit, layout: Sequence[int], device: DeviceModel) -> float:
    """1 - prod(1 - eps_g) over every placed gate occurrence."""
    log_fid = sum(math.log1p(-e) for e in _gate_errors(circuit, layout, device))
    return -math.expm1(log_fid)


def build_qic(circuit: Circuit, layout: Sequence[int] | None = None) -> Circuit:
    """Hadamard layer, one CX per interaction edge, the mirrored CX list, Hadamard layer.

    The net unitary is the identity, so the ideal outcome is |0...0>. ``layout`` is
    accepted for interface symmetry; the QIC lives on virtual qubits and is placed
    by the same layout as the target circuit.
    """
    n = circuit.num_qubits
    edges = interaction_graph(circuit).edges
    hs = tuple(Gate("H", (q,)) for q in range(n))
    cxs = tuple(Gate("CX", e) for e in edges)
    return Circuit(n, hs + cxs + tuple(reversed(cxs)) + hs)


def _layout_seed(seed: int, layout: Sequence[int]) -> int:
    digest = hashlib.sha256(f"{seed}:{','.join(map(str, layout))}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def score_qic(
    circuit: Circuit,
    layout: Sequence[int],
    device: DeviceModel,
    shots: int = 0,
    seed: int = 0,
    qic: Circuit | None = None,
) -> float:
    """1 - P(all zeros) of the layout's QIC under the device noise (exact when ``shots == 0``)."""
    if shots < 0:
        raise ValueError("shots must be >= 0")
    qic = qic if qic is not None else build_qic(circuit)
    noise = NoiseModel.per_gate()
    if shots == 0:
        p0 = exact_zero_probability(qic, layout, device, noise)
        return float(min(1.0, max(0.0, 1.0 - p0)))
    sites = noise_sites(qic, layout, device, noise)
    bits = sample_bitstrings(qic, sites, shots, _layout_seed(seed, layout))
    return float(1.0 - np.mean(~bits.any(axis=1)))


def exact_qic_scores(circuit: Circuit, layouts: Sequence[Layout], device: DeviceModel) -> np.ndarray:
    """Exact QIC scores for many layouts.

    The back-propagation of every Z string is shared; each layout only changes the
    site strengths, so scoring reduces to chunked matrix products.
    """
    qic = build_qic(circuit)
    template = noise_sites(qic, None, None, NoiseModel.noiseless())
    vacuum, hits = heisenberg_paths(template, all_z_strings(qic.num_qubits))
    hits_f = hits.astype(float)
    probs = site_probability_matrix(qic, layouts, device)
    chunk = max(1, (1 << 22) // hits.shape[0])
    out = np.empty(probs.shape[0])
    for start in range(0, probs.shape[0], chunk):
        log_keep = np.log1p(-probs[start : start + chunk]).T
        p0 = vacuum @ np.exp(hits_f @ log_keep) / hits.shape[0]
        out[start : start + chunk] = np.clip(1.0 - p0, 0.0, 1.0)
    return out


def score_layouts(
    circuit: Circuit,
    layouts: LayoutSet | Sequence[Layout],
    device: DeviceModel,
    method: str = "fidelity-product",
    shots: int = 0,
    seed: int = 0,
) -> ScoreTable:
    if method in ("fp", "mapomatic"):
        method = "fidelity-product"
    if method not in METHODS:
        raise ValueError(f"unknown scoring method {method!r}")
    if method == "fidelity-product":
        entries = [ScoredLayout(tuple(l), score_fidelity_product(circuit, l, device), method) for l in layouts]
    elif shots == 0:
        entries = [
            ScoredLayout(tuple(l), float(v), method) for l, v in zip(layouts, exact_qic_scores(circuit, layouts, device))
        ]
    else:
        qic = build_qic(circuit)
        entries = [ScoredLayout(tuple(l), score_qic(circuit, l, device, shots, seed, qic), method) for l in layouts]
    return build_table(entries, method)


def filter_scores(table: ScoreTable, minimum: int = 3) -> ScoreTable:
    """Drop score-one layouts, then drop scores above mean + 3 std of the survivors."""
    if not table.entries:
        raise ValueError("cannot filter an empty score table")
    alive = [e for e in table.entries if e.score < SCORE_ONE]
    if alive:
        scores = np.array([e.score for e in alive])
        cutoff = scores.mean() + 3 * scores.std()
        alive = [e for e in alive if e.score <= cutoff]
    if len(alive) < minimum:
        raise InsufficientLayoutsError("insufficient layouts for extrapolation")
    out = build_table(alive, table.method)
    return ScoreTable(out.entries, table.mean, table.stddev, table.method)
