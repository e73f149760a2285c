"""Noisy expectation values of Pauli observables for Clifford circuits.

Noise convention (used identically by the exact and the sampled path): after a
gate with support of dimension d, the state goes through the depolarizing channel
rho -> (1 - p) rho + p * Tr_S(rho) (x) I/d. Equivalently a uniformly random
d-dimensional Pauli (identity included) is applied with probability p, and a
non-identity Pauli supported on the gate's qubits is attenuated by exactly
(1 - p) in the Heisenberg picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ffzne.circuit import Circuit, CircuitError, Gate, lower_rotations
from ffzne.device import DeviceModel
from ffzne.sim.pauli import PauliBatch
from ffzne.sim.tableau import Tableau

SHOT_BLOCK = 8192
MAX_EXACT_PROBABILITY_QUBITS = 18


@dataclass(frozen=True)
class PauliObservable:
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("an observable needs at least one term")
        n = len(self.terms[0][1])
        for coeff, s in self.terms:
            if len(s) != n or set(s) - set("IXYZ"):
                raise ValueError(f"bad Pauli string {s!r}")
            if not math.isfinite(coeff):
                raise ValueError("observable coefficients must be finite")

    @property
    def num_qubits(self) -> int:
        return len(self.terms[0][1])

    @property
    def is_diagonal(self) -> bool:
        return all(set(s) <= {"I", "Z"} for _, s in self.terms)

    @property
    def identity_part(self) -> float:
        """Tr(O) / 2^n: the value a fully depolarized state reports."""
        return float(sum(c for c, s in self.terms if set(s) == {"I"}))

    def scaled(self, factor: float) -> PauliObservable:
        return PauliObservable(tuple((factor * c, s) for c, s in self.terms))

    def __add__(self, other: PauliObservable) -> PauliObservable:
        return PauliObservable(self.terms + other.terms)


def z_string(n: int, qubits: Sequence[int]) -> str:
    chars = ["I"] * n
    for q in qubits:
        chars[q] = "Z"
    return "".join(chars)


def make_observable(n: int, weight: int) -> PauliObservable:
    """Translation-averaged Z strings of the given weight on neighbouring qubits."""
    if weight not in (1, 2, 3):
        raise ValueError(f"observable weight must be 1, 2 or 3, got {weight}")
    if n < weight:
        raise ValueError(f"need n >= weight, got n={n}, weight={weight}")
    count = n - weight + 1
    return PauliObservable(
        tuple((1.0 / count, z_string(n, range(i, i + weight))) for i in range(count))
    )


@dataclass(frozen=True)
class NoiseModel:
    """``per-gate`` reads depolarizing strengths from the device through the layout;
    ``global`` applies one register-wide depolarizing channel of strength ``p``."""

    mode: str = "per-gate"
    p: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("per-gate", "global", "none"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("global depolarizing strength must lie in [0, 1]")

    @classmethod
    def per_gate(cls) -> NoiseModel:
        return cls("per-gate")

    @classmethod
    def global_depolarizing(cls, p: float) -> NoiseModel:
        return cls("global", p)

    @classmethod
    def noiseless(cls) -> NoiseModel:
        return cls("none")


@dataclass(frozen=True)
class ExpvalEstimate:
    mean: float
    stderr: float
    shots: int
    mode: str

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "shots": self.shots, "mode": self.mode}


@dataclass(frozen=True)
class NoiseSite:
    gate: Gate
    expansion: tuple[Gate, ...]
    p: float


def noise_sites(
    circuit: Circuit,
    layout: Sequence[int] | None,
    device: DeviceModel | None,
    noise: NoiseModel,
) -> list[NoiseSite]:
    """One site per operational gate with the depolarizing strength it incurs."""
    if not circuit.is_clifford:
        raise CircuitError("simulation requires a Clifford circuit")
    per_gate = noise.mode == "per-gate"
    if per_gate and device is None:
        raise ValueError("per-gate noise needs a device")
    mapping = list(layout) if layout is not None else list(range(circuit.num_qubits))
    if per_gate and len(mapping) != circuit.num_qubits:
        raise ValueError("layout length does not match the circuit width")
    sites = []
    for gate, expansion in lower_rotations(circuit):
        p = 0.0
        if per_gate:
            phys = [mapping[q] for q in gate.qubits]
            if gate.kind == "CX":
                if not device.has_edge(*phys):
                    raise ValueError(f"gate {gate} lands on non-edge {tuple(phys)} of {device.name}")
                p = device.edge_error(*phys)
            else:
                p = device.one_qubit_error[phys[0]]
        sites.append(NoiseSite(gate, tuple(expansion), p))
    return sites


def site_probability_matrix(
    circuit: Circuit, layouts: Sequence[Sequence[int]], device: DeviceModel
) -> np.ndarray:
    """Per-gate depolarizing strengths for many layouts at once, shape (layouts, sites)."""
    lay = np.asarray(layouts, dtype=np.int64).reshape(-1, circuit.num_qubits)
    table = np.full((device.num_qubits, device.num_qubits), np.nan)
    for (a, b), err in device.two_qubit_error.items():
        table[a, b] = table[b, a] = err
    one = np.asarray([device.one_qubit_error[q] for q in range(device.num_qubits)])
    cols = []
    for gate in circuit.op_gates:
        if gate.kind == "CX":
            col = table[lay[:, gate.qubits[0]], lay[:, gate.qubits[1]]]
            if np.isnan(col).any():
                raise ValueError(f"gate {gate} lands on a non-edge of {device.name} for some layout")
        else:
            col = one[lay[:, gate.qubits[0]]]
        cols.append(col)
    return np.stack(cols, axis=1) if cols else np.zeros((lay.shape[0], 0))


def _check_observable(circuit: Circuit, observable: PauliObservable) -> None:
    if observable.num_qubits != circuit.num_qubits:
        raise ValueError(
            f"observable acts on {observable.num_qubits} qubits, circuit has {circuit.num_qubits}"
        )


def heisenberg_values(sites: list[NoiseSite], batch: PauliBatch) -> np.ndarray:
    """Back-propagate every row of ``batch`` and return its attenuated vacuum value."""
    weight = np.ones(batch.x.shape[0])
    for site in reversed(sites):
        if site.p > 0.0:
            weight *= np.where(batch.support_hit(site.gate.qubits), 1.0 - site.p, 1.0)
        for g in reversed(site.expansion):
            batch.apply_inverse(g.kind, g.qubits)
    return weight * batch.vacuum_expectation()


def exact_expval(
    circuit: Circuit,
    layout: Sequence[int] | None,
    device: DeviceModel | None,
    noise: NoiseModel,
    observable: PauliObservable,
) -> ExpvalEstimate:
    _check_observable(circuit, observable)
    sites = noise_sites(circuit, layout, device, noise)
    coeffs = np.array([c for c, _ in observable.terms])
    batch = PauliBatch.from_strings([s for _, s in observable.terms])
    value = float(coeffs @ heisenberg_values(sites, batch))
    if noise.mode == "global":
        value = global_depolarizing_expval(value, observable.identity_part, noise.p)
    return ExpvalEstimate(value, 0.0, 0, "exact")


def heisenberg_paths(sites: list[NoiseSite], batch: PauliBatch) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free back-propagation of ``batch`` recording which sites each row crosses.

    Returns ``(vacuum, hits)``: the unattenuated vacuum value per row and a boolean
    (rows x sites) matrix. The path of a Pauli string does not depend on the
    layout, so one call serves every layout of the same circuit.
    """
    hits = np.zeros((batch.x.shape[0], len(sites)), dtype=bool)
    for k in range(len(sites) - 1, -1, -1):
        hits[:, k] = batch.support_hit(sites[k].gate.qubits)
        for g in reversed(sites[k].expansion):
            batch.apply_inverse(g.kind, g.qubits)
    return batch.vacuum_expectation(), hits


def attenuate(vacuum: np.ndarray, hits: np.ndarray, site_p: np.ndarray) -> np.ndarray:
    """Row values after multiplying in (1 - p) for every site a row crosses."""
    site_p = np.asarray(site_p, dtype=float)
    dead = site_p >= 1.0
    log_keep = np.log1p(-np.where(dead, 0.0, site_p))
    weight = np.exp(hits.astype(float) @ log_keep)
    if dead.any():
        weight *= ~hits[:, dead].any(axis=1)
    return vacuum * weight


def all_z_strings(n: int) -> PauliBatch:
    if n > MAX_EXACT_PROBABILITY_QUBITS:
        raise ValueError(f"exact all-zeros probability is limited to {MAX_EXACT_PROBABILITY_QUBITS} qubits")
    codes = np.arange(2**n, dtype=np.int64)
    z = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    return PauliBatch(np.zeros_like(z), z, np.zeros(2**n, bool))


def zero_probability_from_paths(
    vacuum: np.ndarray, hits: np.ndarray, site_p: np.ndarray, global_p: float = 0.0
) -> float:
    values = attenuate(vacuum, hits, site_p)
    if global_p:
        values[1:] *= 1.0 - global_p
    return float(values.sum() / values.size)


def exact_zero_probability(
    circuit: Circuit,
    layout: Sequence[int] | None,
    device: DeviceModel | None,
    noise: NoiseModel,
) -> float:
    """P(all zeros) = 2^-n * sum over Z-type strings of their noisy expectation."""
    batch = all_z_strings(circuit.num_qubits)
    sites = noise_sites(circuit, layout, device, noise)
    vacuum, hits = heisenberg_paths(sites, batch)
    global_p = noise.p if noise.mode == "global" else 0.0
    return zero_probability_from_paths(vacuum, hits, np.array([s.p for s in sites]), global_p)


def reference_sample(circuit: Circuit) -> np.ndarray:
    """One noiseless measurement record with non-zero probability (random branches fixed to 0)."""
    tab = Tableau(circuit.num_qubits)
    for _, expansion in lower_rotations(circuit):
        for g in expansion:
            tab.apply(g.kind, g.qubits)
    return tab.measure_all()


# Letter code -> (x, z) for I, X, Y, Z.
_CODE_X = np.array([False, True, True, False])
_CODE_Z = np.array([False, False, True, True])


def _inject(frame: PauliBatch, qubits: tuple[int, ...], p: float, rng: np.random.Generator) -> None:
    d2 = 4 ** len(qubits)
    fire = np.nonzero(rng.random(frame.x.shape[0]) < p * (d2 - 1) / d2)[0]
    if fire.size == 0:
        return
    codes = rng.integers(1, d2, size=fire.size)
    for k, q in enumerate(qubits):
        letter = (codes >> (2 * (len(qubits) - 1 - k))) & 3
        frame.x[fire, q] ^= _CODE_X[letter]
        frame.z[fire, q] ^= _CODE_Z[letter]


def sample_bitstrings(
    circuit: Circuit,
    sites: list[NoiseSite],
    shots: int,
    seed: int,
    global_p: float = 0.0,
    reference: np.ndarray | None = None,
) -> np.ndarray:
    """Monte Carlo Pauli-fault sampling of Z-basis measurement records.

    Pauli frames start with uniformly random Z components (a no-op on |0...0>) so
    that frame X components reproduce the randomness of non-deterministic
    measurements around a single reference record. Shots are processed in fixed
    blocks, each with its own seed-derived stream, so results depend only on
    ``seed`` and ``shots``.
    """
    n = circuit.num_qubits
    ref = reference_sample(circuit) if reference is None else reference
    out = np.empty((shots, n), dtype=np.uint8)
    for block, start in enumerate(range(0, shots, SHOT_BLOCK)):
        k = min(SHOT_BLOCK, shots - start)
        rng = np.random.default_rng([seed, block])
        frame = PauliBatch(np.zeros((k, n), bool), rng.random((k, n)) < 0.5, np.zeros(k, bool))
        for site in sites:
            for g in site.expansion:
                frame.apply(g.kind, g.qubits)
            if site.p > 0.0:
                _inject(frame, site.gate.qubits, site.p, rng)
        bits = ref[None, :] ^ frame.x.astype(np.uint8)
        if global_p > 0.0:
            mixed = rng.random(k) < global_p
            bits[mixed] = rng.integers(0, 2, size=(int(mixed.sum()), n), dtype=np.uint8)
        out[start : start + k] = bits
    return out


def observable_values(observable: PauliObservable, bits: np.ndarray) -> np.ndarray:
    """Per-shot value of a diagonal observable on measured bitstrings."""
    if not observable.is_diagonal:
        raise ValueError("sampled estimation supports Z-type observables only")
    values = np.zeros(bits.shape[0])
    for coeff, s in observable.terms:
        cols = [q for q, ch in enumerate(s) if ch == "Z"]
        parity = bits[:, cols].sum(axis=1) % 2 if cols else np.zeros(bits.shape[0], dtype=np.int64)
        values += coeff * (1.0 - 2.0 * parity)
    return values


def sampled_expval(
    circuit: Circuit,
    layout: Sequence[int] | None,
    device: DeviceModel | None,
    noise: NoiseModel,
    observable: PauliObservable,
    shots: int,
    seed: int,
) -> ExpvalEstimate:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    _check_observable(circuit, observable)
    sites = noise_sites(circuit, layout, device, noise)
    global_p = noise.p if noise.mode == "global" else 0.0
    values = observable_values(observable, sample_bitstrings(circuit, sites, shots, seed, global_p))
    stderr = float(values.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    return ExpvalEstimate(float(values.mean()), stderr, shots, "sampled")


def expval(
    circuit: Circuit,
    layout: Sequence[int] | None,
    device: DeviceModel | None,
    noise: NoiseModel,
    observable: PauliObservable,
    shots: int = 0,
    seed: int = 0,
) -> ExpvalEstimate:
    """Exact estimate when ``shots == 0``, otherwise Monte Carlo."""
    if shots == 0:
        return exact_expval(circuit, layout, device, noise, observable)
    return sampled_expval(circuit, layout, device, noise, observable, shots, seed)


def global_depolarizing_expval(ideal: float, noisy_floor: float, p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing strength must lie in [0, 1], got {p}")
    return (1.0 - p) * ideal + p * noisy_floor
