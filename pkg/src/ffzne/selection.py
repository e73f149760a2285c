"""Choice of the three layouts whose scores are closest to an arithmetic progression.

Indices are 0-based internally; ``SelectionTriple.to_dict`` reports them 1-based
alongside the 0-based values.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ffzne.layout import Layout
from ffzne.scoring import ScoreTable


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionTriple:
    l1: Layout
    li: Layout
    lj: Layout
    s1: float
    si: float
    sj: float
    i: int
    j: int
    delta: float
    method: str
    cost: float | None = None
    j_norm: float | None = None
    delta_norm: float | None = None
    probes: int | None = None
    wall_time: float = 0.0

    @property
    def layouts(self) -> tuple[Layout, Layout, Layout]:
        return self.l1, self.li, self.lj

    @property
    def scores(self) -> tuple[float, float, float]:
        return self.s1, self.si, self.sj

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "index_base": 1,
            "indices": [1, self.i + 1, self.j + 1],
            "indices0": [0, self.i, self.j],
            "layouts": [list(self.l1), list(self.li), list(self.lj)],
            "scores": [self.s1, self.si, self.sj],
            "delta": self.delta,
            "cost": self.cost,
            "j_norm": self.j_norm,
            "delta_norm": self.delta_norm,
            "probes": self.probes,
            "wall_time": self.wall_time,
        }


def _triple(table: ScoreTable, i: int, j: int, delta: float, method: str, **extra) -> SelectionTriple:
    e = table.entries
    return SelectionTriple(
        e[0].layout, e[i].layout, e[j].layout, e[0].score, e[i].score, e[j].score, i, j, delta, method, **extra
    )


def _row_deltas(s: np.ndarray, i: int) -> np.ndarray:
    """Raw progression defects ||s1 - si| - |si - sj|| for j > i (0-based)."""
    d1 = abs(s[0] - s[i])
    return np.abs(d1 - np.abs(s[i] - s[i + 1 :]))


def exhaustive_search(scores: np.ndarray, a: float) -> tuple[int, int, float, float, float, float]:
    """Minimum-cost pair over all 0 < i < j < m.

    Returns ``(i, j, delta, cost, j_norm, delta_norm)`` with 0-based indices. Cost
    is ``a * (1 - j_norm) + (1 - a) * delta_norm`` where ``j_norm = j / (m - 1)``
    for the 1-based ``j`` and ``delta_norm`` is min-max normalized over all pairs.
    Ties go to the lexicographically smallest ``(i, j)``.
    """
    s = np.asarray(scores, dtype=float)
    m = s.size
    dmin, dmax = math.inf, -math.inf
    for i in range(1, m - 1):
        d = _row_deltas(s, i)
        dmin = min(dmin, float(d.min()))
        dmax = max(dmax, float(d.max()))
    span = dmax - dmin
    j1 = np.arange(1, m + 1, dtype=float)  # 1-based j values
    jterm = a * (1 - j1 / (m - 1))
    best = (math.inf, -1, -1)
    for i in range(1, m - 1):
        d = _row_deltas(s, i)
        dn = (d - dmin) / span if span > 0 else np.zeros_like(d)
        cost = jterm[i + 1 :] + (1 - a) * dn
        k = int(np.argmin(cost))
        if cost[k] < best[0]:
            best = (float(cost[k]), i, i + 1 + k)
    cost, i, j = best
    delta = float(abs(abs(s[0] - s[i]) - abs(s[i] - s[j])))
    dn = (delta - dmin) / span if span > 0 else 0.0
    return i, j, delta, cost, (j + 1) / (m - 1), dn


def select_exhaustive(table: ScoreTable, a: float = 0.1) -> SelectionTriple:
    if not 0.0 <= a <= 1.0:
        raise SelectionError(f"trade-off parameter must lie in [0, 1], got {a}")
    if len(table) < 3:
        raise SelectionError("need at least 3 scored layouts")
    t0 = time.perf_counter()
    i, j, delta, cost, j_norm, delta_norm = exhaustive_search(table.scores, a)
    elapsed = time.perf_counter() - t0
    return _triple(
        table, i, j, delta, "exhaustive", cost=cost, j_norm=j_norm, delta_norm=delta_norm, wall_time=elapsed
    )


def binary_search(scores: np.ndarray, eps: float = 0.0) -> tuple[int, float, int]:
    """Midpoint search between the first and last score.

    Returns ``(index, diff, probes)`` with a 0-based index. The defect is always
    measured against the true endpoints, never the shrinking bounds.
    """
    m = len(scores)
    if m < 3:
        raise SelectionError("Not enough elements")
    s_first, s_last = scores[0], scores[m - 1]
    low, high = 0, m - 1
    best_idx, best_diff = low, math.inf
    probes = 0
    while low <= high:
        mid = (low + high) // 2
        probes += 1
        d1 = scores[mid] - s_first
        d2 = s_last - scores[mid]
        diff = abs(d1 - d2)
        if diff < best_diff:
            best_diff, best_idx = diff, mid
        if diff <= eps:
            break
        if d2 > d1:
            low = mid + 1
        else:
            high = mid - 1
    return best_idx, float(best_diff), probes


def select_binary(table: ScoreTable, eps: float = 0.0) -> SelectionTriple:
    if eps < 0:
        raise SelectionError("tolerance must be non-negative")
    t0 = time.perf_counter()
    idx, diff, probes = binary_search(table.scores, eps)
    elapsed = time.perf_counter() - t0
    return _triple(table, idx, len(table) - 1, diff, "binary", probes=probes, wall_time=elapsed)


def count_probe_evaluations(table: ScoreTable, eps: float = 0.0) -> int:
    return binary_search(table.scores, eps)[2]


def select(table: ScoreTable, strategy: str = "binary", a: float = 0.1, eps: float = 0.0) -> SelectionTriple:
    if strategy == "exhaustive":
        return select_exhaustive(table, a)
    if strategy == "binary":
        return select_binary(table, eps)
    raise SelectionError(f"unknown selection strategy {strategy!r}")
