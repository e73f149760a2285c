"""Folding-free zero-noise extrapolation on simulated superconducting devices."""

from ffzne.circuit import Circuit, Gate, cliffordize, fold, interaction_graph
from ffzne.device import DeviceGenSpec, DeviceModel, generate_device, load_device, save_device
from ffzne.layout import LayoutSet, enumerate_layouts, truncate_by_overlap
from ffzne.mitigation import (
    Extrapolation,
    MitigationReport,
    execution_budget,
    fit_exponential,
    fit_linear,
    richardson_two_point,
    run_ffzne,
    run_folded_zne,
)
from ffzne.scoring import InsufficientLayoutsError, ScoreTable, filter_scores, score_layouts
from ffzne.selection import SelectionTriple, select_binary, select_exhaustive

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "DeviceGenSpec",
    "DeviceModel",
    "Extrapolation",
    "Gate",
    "InsufficientLayoutsError",
    "LayoutSet",
    "MitigationReport",
    "ScoreTable",
    "SelectionTriple",
    "cliffordize",
    "enumerate_layouts",
    "execution_budget",
    "filter_scores",
    "fit_exponential",
    "fit_linear",
    "fold",
    "generate_device",
    "interaction_graph",
    "load_device",
    "richardson_two_point",
    "run_ffzne",
    "run_folded_zne",
    "save_device",
    "score_layouts",
    "select_binary",
    "select_exhaustive",
    "truncate_by_overlap",
]
