"""Flatten mitigation reports to CSV and emit the data behind the standard plots."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ffzne.mitigation import execution_budget

REPORT_COLUMNS = ("family", "n", "reps", "method", "score_method", "estimate", "ideal", "deviation_pct")
FIT_SAMPLES = 50


class ReportFieldError(KeyError):
    def __str__(self) -> str:
        return f"report is missing field {self.args[0]!r}"


def _need(doc: dict, *path: str):
    cur = doc
    for key in path:
        if not isinstance(cur, dict) or key not in cur:
            raise ReportFieldError(".".join(path))
        cur = cur[key]
    return cur


def load_reports(paths: Iterable[str | Path]) -> list[dict]:
    return [json.loads(Path(p).read_text()) for p in paths]


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def flatten_reports(reports: Sequence[dict]) -> str:
    rows = []
    for doc in reports:
        meta = doc.get("meta", {})
        rows.append(
            (
                meta.get("family", ""),
                meta.get("n", ""),
                meta.get("reps", ""),
                _need(doc, "method"),
                meta.get("score_method", ""),
                _need(doc, "estimate"),
                _need(doc, "ideal"),
                _need(doc, "deviation_pct"),
            )
        )
    return _csv_text(REPORT_COLUMNS, rows)


def _fit_curve(extrap: dict, xs: np.ndarray) -> np.ndarray:
    model = _need(extrap, "model")
    params = _need(extrap, "params")
    if model == "exponential":
        return params["A"] + params["B"] * np.exp(params["C"] * xs)
    if model == "linear":
        return params["intercept"] + params["slope"] * xs
    if model == "richardson2":
        return np.full_like(xs, float(_need(extrap, "zero_noise_estimate")))
    raise ReportFieldError("extrapolation.model")


def extrapolation_rows(reports: Sequence[dict]) -> list[tuple]:
    """Measured points plus ``FIT_SAMPLES`` samples of the fitted curve from 0 to the largest x."""
    rows: list[tuple] = []
    for idx, doc in enumerate(reports):
        points = _need(doc, "points")
        extrap = _need(doc, "extrapolation")
        if extrap is None:
            raise ReportFieldError("extrapolation")
        axis = _need(extrap, "x_axis")
        for p in points:
            rows.append((idx, doc.get("method", ""), axis, "data", repr(float(p["x"])), repr(float(p["expval"]))))
        xmax = max(float(p["x"]) for p in points)
        xs = np.linspace(0.0, xmax, FIT_SAMPLES)
        for x, y in zip(xs, _fit_curve(extrap, xs)):
            rows.append((idx, doc.get("method", ""), axis, "fit", repr(float(x)), repr(float(y))))
    return rows


def scatter_rows(reports: Sequence[dict]) -> list[tuple]:
    rows = []
    for idx, doc in enumerate(reports):
        if _need(doc, "method") != "ffzne":
            continue
        for p in _need(doc, "points"):
            layout = " ".join(map(str, p.get("layout", [])))
            rows.append((idx, repr(float(p["x"])), repr(float(p["expval"])), layout))
    return rows


def budget_rows() -> list[tuple]:
    return [("ffzne", execution_budget("ffzne")), ("exhaustive-zne", execution_budget("exhaustive-zne"))]


def emit_plot_data(reports: Sequence[dict], out_dir: str | Path) -> dict[str, Path]:
    """Write extrapolation, budget and score-vs-expval CSVs; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "extrapolation": (
            ("report", "method", "x_axis", "kind", "x", "y"),
            extrapolation_rows(reports),
        ),
        "budget": (("method", "executions"), budget_rows()),
        "scatter": (("report", "score", "expval", "layout"), scatter_rows(reports)),
    }
    paths = {}
    for name, (header, rows) in files.items():
        path = out / f"{name}.csv"
        path.write_text(_csv_text(header, rows))
        paths[name] = path
    return paths
