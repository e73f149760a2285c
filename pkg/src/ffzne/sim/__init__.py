"""Noisy Clifford simulation."""

from ffzne.sim.expval import (
    ExpvalEstimate,
    NoiseModel,
    PauliObservable,
    exact_expval,
    exact_zero_probability,
    expval,
    global_depolarizing_expval,
    make_observable,
    noise_sites,
    sample_bitstrings,
    sampled_expval,
)
from ffzne.sim.pauli import PauliBatch
from ffzne.sim.tableau import Tableau

__all__ = [
    "ExpvalEstimate",
    "NoiseModel",
    "PauliBatch",
    "PauliObservable",
    "Tableau",
    "exact_expval",
    "exact_zero_probability",
    "expval",
    "global_depolarizing_expval",
    "make_observable",
    "noise_sites",
    "sample_bitstrings",
    "sampled_expval",
]
