"""Zero-noise extrapolation: the layout-score pipeline and the folded-circuit baseline."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, least_squares

from ffzne.circuit import Circuit, fold, interaction_graph
from ffzne.device import DeviceModel
from ffzne.layout import LayoutSet, enumerate_layouts, truncate_by_overlap
from ffzne.scoring import ScoreTable, filter_scores, score_layouts
from ffzne.selection import SelectionTriple, select
from ffzne.sim.expval import ExpvalEstimate, NoiseModel, PauliObservable, exact_expval, expval, make_observable

# Noise-factor sets commonly used for folded ZNE; trying all of them costs 28 executions.
LITERATURE_NOISE_FACTORS: tuple[tuple[float, ...], ...] = (
    (1, 3, 5),
    (1, 1.1, 1.2),
    (1, 2, 3),
    (1, 1.5, 2, 2.5, 3),
    (1, 3, 5, 7),
    (1.2, 1.4, 1.6, 1.8, 2.0),
    (1, 3),
    (1, 1.2, 1.6),
)

_EXP_DEGENERATE_RATE = 1e-9


class ExtrapolationError(ValueError):
    pass


@dataclass
class Extrapolation:
    model: str
    params: dict[str, float]
    zero_noise_estimate: float
    residuals: list[float]
    x_axis: str = "layout-score"
    flags: list[str] = field(default_factory=list)

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.model == "exponential":
            return p["A"] + p["B"] * np.exp(p["C"] * x)
        if self.model == "richardson2":
            return np.full_like(x, self.zero_noise_estimate)
        return p["intercept"] + p["slope"] * x

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": self.params,
            "zero_noise_estimate": self.zero_noise_estimate,
            "residuals": self.residuals,
            "x_axis": self.x_axis,
            "flags": self.flags,
        }


def _xy(points: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def richardson_two_point(e1: float, e2: float, delta: float) -> float:
    """Zero-noise value from two runs whose noise strengths differ by the factor ``delta``."""
    if not delta > 1:
        raise ExtrapolationError(f"noise ratio must exceed 1, got {delta}")
    return delta / (delta - 1) * e1 - 1 / (delta - 1) * e2


def fit_linear(
    points: Sequence[tuple[float, float]],
    x_axis: str = "layout-score",
    weights: Sequence[float] | None = None,
) -> Extrapolation:
    """Least-squares line through ``(x, y)`` points, evaluated at x = 0.

    ``weights`` (e.g. inverse variances) switch to weighted least squares.
    """
    x, y = _xy(points)
    if x.size < 2:
        raise ExtrapolationError("linear extrapolation needs at least 2 points")
    if np.ptp(x) == 0:
        raise ExtrapolationError("degenerate abscissae")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    slope = float(np.sum(w * (x - xm) * (y - ym)) / np.sum(w * (x - xm) ** 2))
    intercept = float(ym - slope * xm)
    resid = (y - (intercept + slope * x)).tolist()
    flags = ["weighted"] if weights is not None else []
    return Extrapolation("linear", {"intercept": intercept, "slope": slope}, intercept, resid, x_axis, flags)


def _exp_rate_three_point(x: np.ndarray, y: np.ndarray) -> float:
    """Rate C of y = A + B exp(C x) through three points (x sorted ascending)."""
    d1, d2 = y[1] - y[0], y[2] - y[1]
    if d1 == 0 or d2 == 0 or d1 * d2 < 0:
        raise ExtrapolationError("exponential fit failed: no real rate through the points")
    h1, h2 = x[1] - x[0], x[2] - x[1]
    ratio = d2 / d1
    if math.isclose(h1, h2, rel_tol=1e-12, abs_tol=1e-15):
        return math.log(ratio) / h1

    def g(c: float) -> float:
        if abs(c) < 1e-12:
            return h2 / h1 - ratio
        return math.expm1(c * h2) * math.exp(c * h1) / math.expm1(c * h1) - ratio

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if g(lo) * g(hi) < 0:
            return brentq(g, lo, hi, xtol=1e-14)
        lo, hi = lo * 2, hi * 2
        if hi > 1e6:
            break
    raise ExtrapolationError("exponential fit failed: rate root not bracketed")


def fit_exponential(points: Sequence[tuple[float, float]], x_axis: str = "noise-factor") -> Extrapolation:
    """Fit y = A + B exp(C x) and evaluate at x = 0.

    Three points are solved in closed form. More points are refined by least
    squares starting from the closed-form solution of the first/middle/last point.
    A vanishing rate falls back to the linear fit; a constant series returns that
    constant. Both cases are flagged.
    """
    x, y = _xy(points)
    order = np.argsort(x)
    x, y = x[order], y[order]
    if x.size < 3:
        raise ExtrapolationError("exponential extrapolation needs at least 3 points")
    if np.unique(x).size != x.size:
        raise ExtrapolationError("degenerate abscissae")
    if np.ptp(y) == 0:
        c = float(y[0])
        return Extrapolation("exponential", {"A": c, "B": 0.0, "C": 0.0}, c, [0.0] * x.size, x_axis, ["constant"])
    idx = [0, x.size // 2, x.size - 1]
    xs, ys = x[idx], y[idx]
    try:
        rate = _exp_rate_three_point(xs, ys)
    except ExtrapolationError:
        if x.size == 3:
            raise
        rate = None
    if rate is not None and abs(rate) < _EXP_DEGENERATE_RATE:
        lin = fit_linear(list(zip(x, y)), x_axis)
        lin.flags.append("exponential-degenerate-linear-fallback")
        return lin
    if rate is not None:
        b = (ys[1] - ys[0]) / (math.exp(rate * xs[1]) - math.exp(rate * xs[0]))
        a = ys[0] - b * math.exp(rate * xs[0])
    else:
        a, b, rate = float(y[-1]), float(y[0] - y[-1]), -1.0
    flags: list[str] = []
    if x.size > 3:
        res = least_squares(lambda p: p[0] + p[1] * np.exp(p[2] * x) - y, x0=[a, b, rate], method="lm")
        if not res.success or not np.all(np.isfinite(res.x)):
            raise ExtrapolationError("exponential fit failed: least squares did not converge")
        a, b, rate = (float(v) for v in res.x)
        flags.append("least-squares")
    estimate = a + b
    if not math.isfinite(estimate):
        raise ExtrapolationError("exponential fit failed: non-finite estimate")
    resid = (y - (a + b * np.exp(rate * x))).tolist()
    return Extrapolation("exponential", {"A": a, "B": b, "C": rate}, estimate, resid, x_axis, flags)


def extrapolate(points: Sequence[tuple[float, float]], model: str, x_axis: str) -> Extrapolation:
    if model == "linear":
        return fit_linear(points, x_axis)
    if model in ("exponential", "exp"):
        return fit_exponential(points, x_axis)
    if model == "richardson2":
        if len(points) != 2:
            raise ExtrapolationError("two-point Richardson extrapolation takes exactly 2 points")
        (x1, e1), (x2, e2) = sorted(points)
        est = richardson_two_point(e1, e2, x2 / x1)
        return Extrapolation("richardson2", {"delta": x2 / x1}, est, [0.0, 0.0], x_axis)
    raise ExtrapolationError(f"unknown extrapolator {model!r}")


@dataclass
class MitigationReport:
    method: str
    points: list[dict]
    extrapolation: Extrapolation | None
    ideal: float | None = None
    triple: SelectionTriple | None = None
    noise_factors: list[float] | None = None
    unmitigated: float | None = None
    timings: dict[str, float] = field(default_factory=dict)
    executions: int = 0
    layout_count: int = 0
    error: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def estimate(self) -> float | None:
        return None if self.extrapolation is None else self.extrapolation.zero_noise_estimate

    @property
    def deviation_pct(self) -> float | None:
        return deviation_pct(self.estimate, self.ideal)

    @property
    def unmitigated_deviation_pct(self) -> float | None:
        return deviation_pct(self.unmitigated, self.ideal)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "triple": None if self.triple is None else self.triple.to_dict(),
            "noise_factors": self.noise_factors,
            "points": self.points,
            "extrapolation": None if self.extrapolation is None else self.extrapolation.to_dict(),
            "estimate": self.estimate,
            "ideal": self.ideal,
            "deviation_pct": self.deviation_pct,
            "unmitigated": self.unmitigated,
            "unmitigated_deviation_pct": self.unmitigated_deviation_pct,
            "executions": self.executions,
            "layout_count": self.layout_count,
            "timings": self.timings,
            "error": self.error,
            "meta": self.meta,
        }


def deviation_pct(estimate: float | None, ideal: float | None) -> float | None:
    if estimate is None or ideal is None or ideal == 0:
        return None
    return 100.0 * abs(estimate - ideal) / abs(ideal)


def ideal_expval(circuit: Circuit, observable: PauliObservable) -> float:
    return exact_expval(circuit, None, None, NoiseModel.noiseless(), observable).mean


def run_ffzne(
    circuit: Circuit,
    device: DeviceModel,
    score_method: str = "fidelity-product",
    selection_strategy: str = "binary",
    a: float = 0.1,
    shots: int = 0,
    seed: int = 0,
    *,
    observable: PauliObservable | None = None,
    eta: int | None = None,
    eps: float = 0.0,
    cap: int | None = None,
    score_shots: int = 0,
    weighted: bool = False,
    layouts: LayoutSet | None = None,
) -> MitigationReport:
    """Score isomorphic layouts, pick three, run the circuit on each and extrapolate to score 0.

    ``shots == 0`` runs the circuit executions in exact mode; ``score_shots`` does
    the same for QIC scoring.
    """
    observable = observable or make_observable(circuit.num_qubits, 1)
    timings: dict[str, float] = {}
    t = time.perf_counter()
    if layouts is None:
        layouts = enumerate_layouts(interaction_graph(circuit), device, cap=cap, circuit_hash=circuit.digest())
        if eta is not None:
            layouts = truncate_by_overlap(layouts, eta, device.num_qubits)
    timings["layouts"] = time.perf_counter() - t
    if not layouts.layouts:
        raise ValueError("circuit interaction graph does not embed into the device")

    t = time.perf_counter()
    table = score_layouts(circuit, layouts, device, score_method, score_shots, seed)
    timings["score"] = time.perf_counter() - t
    table = filter_scores(table)

    t = time.perf_counter()
    triple = select(table, selection_strategy, a=a, eps=eps)
    timings["select"] = time.perf_counter() - t

    t = time.perf_counter()
    noise = NoiseModel.per_gate()
    estimates: list[ExpvalEstimate] = [
        expval(circuit, lay, device, noise, observable, shots, seed + k) for k, lay in enumerate(triple.layouts)
    ]
    timings["execute"] = time.perf_counter() - t

    points = [
        {"x": s, "expval": e.mean, "stderr": e.stderr, "layout": list(lay)}
        for s, e, lay in zip(triple.scores, estimates, triple.layouts)
    ]
    xy = [(p["x"], p["expval"]) for p in points]
    error = None
    fit = None
    try:
        if weighted and shots > 0:
            fit = fit_linear(xy, "layout-score", weights=[1.0 / max(e.stderr, 1e-12) ** 2 for e in estimates])
        else:
            fit = fit_linear(xy, "layout-score")
    except ExtrapolationError as exc:
        error = str(exc)
    return MitigationReport(
        method="ffzne",
        points=points,
        extrapolation=fit,
        ideal=ideal_expval(circuit, observable),
        triple=triple,
        unmitigated=estimates[0].mean,
        timings=timings,
        executions=len(estimates),
        layout_count=len(table),
        error=error,
        meta={
            "score_method": table.method,
            "strategy": selection_strategy,
            "a": a,
            "eps": eps,
            "eta": eta,
            "shots": shots,
            "seed": seed,
            "layouts_enumerated": len(layouts),
            "score_mean": table.mean,
            "score_stddev": table.stddev,
        },
    )


def run_folded_zne(
    circuit: Circuit,
    device: DeviceModel,
    layout: Sequence[int],
    noise_factors: Sequence[float],
    extrapolator: str = "linear",
    shots: int = 0,
    seed: int = 0,
    *,
    observable: PauliObservable | None = None,
) -> MitigationReport:
    """Conventional ZNE: fold the circuit per noise factor on one fixed layout and extrapolate."""
    lams = [float(v) for v in noise_factors]
    if not lams or lams[0] < 1 or any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("noise factors must be strictly ascending and start at >= 1")
    need = 3 if extrapolator in ("exponential", "exp") else 2
    if len(lams) < need:
        raise ValueError(f"{extrapolator} extrapolation needs at least {need} noise factors")
    observable = observable or make_observable(circuit.num_qubits, 1)
    noise = NoiseModel.per_gate()
    t = time.perf_counter()
    estimates = [
        expval(fold(circuit, lam), layout, device, noise, observable, shots, seed + k) for k, lam in enumerate(lams)
    ]
    elapsed = time.perf_counter() - t
    points = [{"x": lam, "expval": e.mean, "stderr": e.stderr} for lam, e in zip(lams, estimates)]
    error = None
    fit = None
    try:
        fit = extrapolate([(p["x"], p["expval"]) for p in points], extrapolator, "noise-factor")
    except ExtrapolationError as exc:
        error = str(exc)
    return MitigationReport(
        method="zne",
        points=points,
        extrapolation=fit,
        ideal=ideal_expval(circuit, observable),
        noise_factors=lams,
        unmitigated=estimates[0].mean,
        timings={"execute": elapsed},
        executions=len(lams),
        error=error,
        meta={"extrapolator": extrapolator, "layout": list(layout), "shots": shots, "seed": seed},
    )


def execution_budget(mode: str, noise_factors: Sequence[float] | None = None) -> int:
    """Circuit executions needed by a mitigation mode.

    ``ffzne`` always needs 3; ``exhaustive-zne`` tries every literature noise-factor
    set; ``zne`` needs one execution per noise factor.
    """
    if mode == "ffzne":
        return 3
    if mode == "exhaustive-zne":
        return sum(len(s) for s in LITERATURE_NOISE_FACTORS)
    if mode == "zne":
        if not noise_factors:
            raise ValueError("zne budget needs the noise-factor list")
        return len(noise_factors)
    raise ValueError(f"unknown mode {mode!r}")
