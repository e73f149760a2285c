"""Circuit IR over a Clifford+rotation gate set, benchmark generators and circuit passes."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

ONE_QUBIT_CLIFFORDS = ("H", "S", "Sdg", "X", "Y", "Z")
ROTATIONS = ("RX", "RY", "RZ")
KINDS = ONE_QUBIT_CLIFFORDS + ("CX",) + ROTATIONS + ("Barrier",)

HALF_PI = math.pi / 2
_CLIFFORD_ANGLE_TOL = 1e-9

_INVERSE = {"H": "H", "S": "Sdg", "Sdg": "S", "X": "X", "Y": "Y", "Z": "Z", "CX": "CX"}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind == "CX":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise CircuitError(f"CX needs two distinct qubits, got {self.qubits}")
        elif self.kind != "Barrier" and len(self.qubits) != 1:
            raise CircuitError(f"{self.kind} acts on exactly one qubit, got {self.qubits}")
        if self.kind in ROTATIONS:
            if self.theta is None or not math.isfinite(self.theta):
                raise CircuitError(f"{self.kind} needs a finite angle, got {self.theta!r}")
            object.__setattr__(self, "theta", float(self.theta))
        elif self.theta is not None:
            raise CircuitError(f"{self.kind} takes no angle")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind == "CX"

    @property
    def is_clifford(self) -> bool:
        return self.kind not in ROTATIONS or _is_clifford_angle(self.theta)

    def inverse(self) -> Gate:
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.qubits, -self.theta)
        if self.kind == "Barrier":
            return self
        return Gate(_INVERSE[self.kind], self.qubits)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "qubits": list(self.qubits)}
        if self.theta is not None:
            d["theta"] = self.theta
        return d


def _is_clifford_angle(theta: float) -> bool:
    k = theta / HALF_PI
    return abs(k - round(k)) < _CLIFFORD_ANGLE_TOL


@dataclass(frozen=True)
class Circuit:
    """Ordered gate program on ``num_qubits`` virtual qubits, starting from |0...0>."""

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    is_clifford: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= q < self.num_qubits for q in g.qubits):
                raise CircuitError(f"gate {g} addresses a qubit outside 0..{self.num_qubits - 1}")
        object.__setattr__(self, "is_clifford", all(g.is_clifford for g in self.gates))

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def op_gates(self) -> list[Gate]:
        """Gates that act on the state (everything except barriers)."""
        return [g for g in self.gates if g.kind != "Barrier"]

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def two_qubit_depth(self) -> int:
        level = [0] * self.num_qubits
        for g in self.gates:
            if g.kind == "CX":
                a, b = g.qubits
                level[a] = level[b] = max(level[a], level[b]) + 1
            elif g.kind == "Barrier" and g.qubits:
                top = max(level[q] for q in g.qubits)
                for q in g.qubits:
                    level[q] = top
        return max(level, default=0)

    def inverse(self) -> Circuit:
        return Circuit(self.num_qubits, tuple(g.inverse() for g in reversed(self.gates)))

    def to_dict(self) -> dict:
        return {"num_qubits": self.num_qubits, "gates": [g.to_dict() for g in self.gates]}

    @classmethod
    def from_dict(cls, data: dict) -> Circuit:
        try:
            gates = [Gate(g["kind"], tuple(g["qubits"]), g.get("theta")) for g in data["gates"]]
            return cls(int(data["num_qubits"]), tuple(gates))
        except (KeyError, TypeError) as exc:
            raise CircuitError(f"malformed circuit document: {exc}") from exc

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def save_circuit(circuit: Circuit, path: str | Path, meta: dict | None = None) -> None:
    """Write circuit JSON; ``meta`` (family, n, reps, ...) rides along and is ignored on load."""
    doc = circuit.to_dict()
    if meta:
        doc["meta"] = meta
    Path(path).write_text(json.dumps(doc) + "\n")


def load_circuit(path: str | Path) -> Circuit:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CircuitError(f"invalid JSON: {exc}") from exc
    return Circuit.from_dict(data)


def load_circuit_meta(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text())
    return dict(data.get("meta") or {})


# --- generators -------------------------------------------------------------


def gen_efficient_su2(n: int, reps: int, seed: int = 0, angle_scale: float = 2 * math.pi) -> Circuit:
    """Hardware-efficient RY/RZ ansatz with linear CX entanglement.

    Angles are drawn uniformly from ``[0, angle_scale)``; a final rotation layer
    follows the last repetition. A full-width barrier closes every entangling
    block, so CX ladders of successive repetitions do not overlap in depth.
    """
    if n < 2:
        raise CircuitError("EfficientSU2 needs n >= 2")
    if reps < 1:
        raise CircuitError("EfficientSU2 needs reps >= 1")
    rng = np.random.default_rng(seed)
    gates: list[Gate] = []

    def rotation_layer() -> None:
        angles = rng.uniform(0.0, angle_scale, size=2 * n)
        for q in range(n):
            gates.append(Gate("RY", (q,), float(angles[q])))
        for q in range(n):
            gates.append(Gate("RZ", (q,), float(angles[n + q])))

    for _ in range(reps):
        rotation_layer()
        gates.extend(Gate("CX", (q, q + 1)) for q in range(n - 1))
        gates.append(Gate("Barrier", tuple(range(n))))
    rotation_layer()
    return Circuit(n, tuple(gates))


def gen_hamiltonian_sim(
    n: int, trotter_steps: int, dt: float = 0.1, coupling: float = 1.0, field: float = 1.0
) -> Circuit:
    """First-order Trotterization of the 1-D transverse-field Ising model.

    Each step applies exp(-i J dt Z_i Z_{i+1}) on even then odd bonds (as
    CX-RZ-CX blocks) followed by exp(-i h dt X_i) on every qubit.
    """
    if n < 2:
        raise CircuitError("Hamiltonian simulation needs n >= 2")
    if trotter_steps < 1:
        raise CircuitError("need at least one Trotter step")
    zz_angle = 2 * coupling * dt
    x_angle = 2 * field * dt
    gates: list[Gate] = []
    for _ in range(trotter_steps):
        for start in (0, 1):
            for q in range(start, n - 1, 2):
                gates += [Gate("CX", (q, q + 1)), Gate("RZ", (q + 1,), zz_angle), Gate("CX", (q, q + 1))]
        gates += [Gate("RX", (q,), x_angle) for q in range(n)]
    return Circuit(n, tuple(gates))


def gen_mirrored_brickwork(n: int, depth: int, seed: int = 0) -> Circuit:
    """Random two-qubit Clifford brickwork of ``depth/2`` layers followed by its inverse."""
    if n < 2:
        raise CircuitError("brickwork needs n >= 2")
    if depth < 0 or depth % 2:
        raise CircuitError(f"brickwork depth must be even and non-negative, got {depth}")
    rng = np.random.default_rng(seed)
    half: list[Gate] = []
    for layer in range(depth // 2):
        for q in range(layer % 2, n - 1, 2):
            a, b = (q, q + 1) if rng.integers(2) == 0 else (q + 1, q)
            for target in (a, b):
                half.append(Gate(ONE_QUBIT_CLIFFORDS[rng.integers(len(ONE_QUBIT_CLIFFORDS))], (target,)))
            half.append(Gate("CX", (a, b)))
    forward = Circuit(n, tuple(half))
    return Circuit(n, forward.gates + forward.inverse().gates)


def random_clifford_circuit(n: int, num_gates: int, seed: int = 0, cx_fraction: float = 0.3) -> Circuit:
    """Uniformly mixed random gates from the Clifford gate set (test workload)."""
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(num_gates):
        if n > 1 and rng.random() < cx_fraction:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate("CX", (int(a), int(b))))
        else:
            kind = ONE_QUBIT_CLIFFORDS[rng.integers(len(ONE_QUBIT_CLIFFORDS))]
            gates.append(Gate(kind, (int(rng.integers(n)),)))
    return Circuit(n, tuple(gates))


# --- passes -----------------------------------------------------------------

# Clifford rewrites of R(k*pi/2), k mod 4, as gate sequences in time order (global phase dropped).
_ROTATION_WORDS = {
    "RZ": {0: (), 1: ("S",), 2: ("Z",), 3: ("Sdg",)},
    "RX": {0: (), 1: ("H", "S", "H"), 2: ("X",), 3: ("H", "Sdg", "H")},
    "RY": {0: (), 1: ("H", "X"), 2: ("Y",), 3: ("X", "H")},
}


def snap_quarter_turns(theta: float) -> int:
    """Nearest multiple of pi/2 (ties toward the smaller multiple), as k mod 4."""
    return int(math.ceil(theta / HALF_PI - 0.5)) % 4


def cliffordize(circuit: Circuit) -> Circuit:
    out: list[Gate] = []
    for g in circuit.gates:
        if g.kind in ROTATIONS:
            k = snap_quarter_turns(g.theta)
            out.extend(Gate(kind, g.qubits) for kind in _ROTATION_WORDS[g.kind][k])
        else:
            out.append(g)
    return Circuit(circuit.num_qubits, tuple(out))


def lower_rotations(circuit: Circuit) -> list[tuple[Gate, list[Gate]]]:
    """Pair every operational gate with its Clifford-gate-set expansion.

    Rotations must already sit on Clifford angles. Used by the simulators, which
    attach one noise site per original gate.
    """
    pairs = []
    for g in circuit.gates:
        if g.kind == "Barrier":
            continue
        if g.kind in ROTATIONS:
            if not g.is_clifford:
                raise CircuitError(f"non-Clifford rotation {g}")
            k = round(g.theta / HALF_PI) % 4
            pairs.append((g, [Gate(kind, g.qubits) for kind in _ROTATION_WORDS[g.kind][k]]))
        else:
            pairs.append((g, [g]))
    return pairs


def fold(circuit: Circuit, scale: float) -> Circuit:
    """Local unitary folding G -> G (G^dag G)^k.

    Odd integer scales fold every gate. For other scales every gate gets
    ``floor((scale - 1) / 2)`` folds and the leading gates get one extra fold so
    that the gate count is ``round(scale * N)`` within one.
    """
    if not scale >= 1:
        raise CircuitError(f"noise scale factor must be >= 1, got {scale}")
    ops = [g for g in circuit.gates if g.kind != "Barrier"]
    n_ops = len(ops)
    half = (scale - 1) / 2
    base = int(math.floor(half + 1e-12))
    extra = int(round((half - base) * n_ops))
    out: list[Gate] = []
    idx = 0
    for g in circuit.gates:
        if g.kind == "Barrier":
            out.append(g)
            continue
        k = base + (1 if idx < extra else 0)
        idx += 1
        out.append(g)
        inv = g.inverse()
        for _ in range(k):
            out += [inv, g]
    return Circuit(circuit.num_qubits, tuple(out))


_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_PAULI = {v: k for k, v in _PAULI_BITS.items()}


def _cx_conjugate(pc: str, pt: str) -> tuple[str, str]:
    """CX (P_c x P_t) CX up to sign."""
    xc, zc = _PAULI_BITS[pc]
    xt, zt = _PAULI_BITS[pt]
    return _BITS_PAULI[(xc, zc ^ zt)], _BITS_PAULI[(xt ^ xc, zt)]


def pauli_twirl(circuit: Circuit, seed: int = 0) -> Circuit:
    """Sandwich every CX between a random Pauli and its CX-conjugate."""
    if not circuit.is_clifford:
        raise CircuitError("Pauli twirling requires a Clifford circuit")
    rng = np.random.default_rng(seed)
    out: list[Gate] = []
    for g in circuit.gates:
        if g.kind != "CX":
            out.append(g)
            continue
        c, t = g.qubits
        pc, pt = "IXYZ"[rng.integers(4)], "IXYZ"[rng.integers(4)]
        qc, qt = _cx_conjugate(pc, pt)
        out += [Gate(p, (q,)) for p, q in ((pc, c), (pt, t)) if p != "I"]
        out.append(g)
        out += [Gate(p, (q,)) for p, q in ((qc, c), (qt, t)) if p != "I"]
    return Circuit(circuit.num_qubits, tuple(out))


@dataclass(frozen=True)
class InteractionGraph:
    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(nb) for nb in adj]

    def is_connected(self) -> bool:
        if self.num_vertices == 0:
            return True
        adj = self.neighbors()
        seen = {0}
        stack = [0]
        while stack:
            for u in adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.num_vertices


def interaction_graph(circuit: Circuit) -> InteractionGraph:
    edges = {tuple(sorted(g.qubits)) for g in circuit.gates if g.kind == "CX"}
    return InteractionGraph(circuit.num_qubits, tuple(sorted(edges)))


def graph_from_edges(n: int, edges: Iterable[Sequence[int]]) -> InteractionGraph:
    return InteractionGraph(n, tuple(sorted({tuple(sorted(e)) for e in edges})))
