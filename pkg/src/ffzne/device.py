"""Hardware model: coupling graph plus per-gate error rates, and synthetic device generation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

DEAD_ERROR = 0.999
MIN_ERROR = 1e-5

TOPOLOGIES = ("heavy-hex", "ring", "grid", "line")


class DeviceValidationError(ValueError):
    """A device violates one of its invariants."""


class DeviceSchemaError(ValueError):
    """A device file does not match the expected JSON schema."""


def canonical_edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, eq=False)
class DeviceModel:
    """Coupling graph and calibration data of a (synthetic) quantum processor.

    Edges are undirected and stored canonicalized as ``(min, max)``. The model is
    immutable after construction; adjacency is precomputed for the layout search.
    """

    num_qubits: int
    edges: frozenset[tuple[int, int]]
    two_qubit_error: Mapping[tuple[int, int], float]
    one_qubit_error: Mapping[int, float]
    name: str = "device"
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        edges = frozenset(canonical_edge(a, b) for a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(
            self,
            "two_qubit_error",
            {canonical_edge(*e): float(v) for e, v in self.two_qubit_error.items()},
        )
        object.__setattr__(
            self, "one_qubit_error", {int(q): float(v) for q, v in self.one_qubit_error.items()}
        )
        self.validate()
        adj: list[list[int]] = [[] for _ in range(self.num_qubits)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(nb)) for nb in adj))

    def validate(self) -> None:
        if not isinstance(self.num_qubits, int) or self.num_qubits < 1:
            raise DeviceValidationError(f"num_qubits must be a positive integer, got {self.num_qubits!r}")
        for a, b in self.edges:
            if a == b:
                raise DeviceValidationError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise DeviceValidationError(f"edge {(a, b)} out of range for {self.num_qubits} qubits")
        if set(self.two_qubit_error) != set(self.edges):
            missing = set(self.edges) - set(self.two_qubit_error)
            extra = set(self.two_qubit_error) - set(self.edges)
            raise DeviceValidationError(
                f"two_qubit_error keys do not match edges (missing={sorted(missing)}, extra={sorted(extra)})"
            )
        if set(self.one_qubit_error) != set(range(self.num_qubits)):
            raise DeviceValidationError("one_qubit_error must have exactly one entry per qubit")
        for key, p in list(self.two_qubit_error.items()) + list(self.one_qubit_error.items()):
            if not (math.isfinite(p) and 0.0 <= p < 1.0):
                raise DeviceValidationError(f"error probability {p!r} for {key!r} outside [0, 1)")

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adj

    def degree(self, q: int) -> int:
        return len(self._adj[q])

    def has_edge(self, a: int, b: int) -> bool:
        return canonical_edge(a, b) in self.two_qubit_error

    def edge_error(self, a: int, b: int) -> float:
        return self.two_qubit_error[canonical_edge(a, b)]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def with_errors(
        self,
        two_qubit_error: Mapping[tuple[int, int], float] | None = None,
        one_qubit_error: Mapping[int, float] | None = None,
    ) -> DeviceModel:
        """Copy of this device with some error entries replaced."""
        e2 = dict(self.two_qubit_error)
        e2.update({canonical_edge(*k): v for k, v in (two_qubit_error or {}).items()})
        e1 = dict(self.one_qubit_error)
        e1.update(one_qubit_error or {})
        return DeviceModel(self.num_qubits, self.edges, e2, e1, self.name)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DeviceModel):
            return NotImplemented
        return (
            self.num_qubits == other.num_qubits
            and self.edges == other.edges
            and dict(self.two_qubit_error) == dict(other.two_qubit_error)
            and dict(self.one_qubit_error) == dict(other.one_qubit_error)
            and self.name == other.name
        )

    def __hash__(self) -> int:
        return hash((self.num_qubits, self.edges, self.name))

    def to_dict(self) -> dict:
        edges = self.sorted_edges()
        return {
            "name": self.name,
            "num_qubits": self.num_qubits,
            "edges": [list(e) for e in edges],
            "two_qubit_error": {f"{a}-{b}": self.two_qubit_error[(a, b)] for a, b in edges},
            "one_qubit_error": {str(q): self.one_qubit_error[q] for q in range(self.num_qubits)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> DeviceModel:
        if not isinstance(data, dict):
            raise DeviceSchemaError("device document must be a JSON object")
        for key, typ in (
            ("name", str),
            ("num_qubits", int),
            ("edges", list),
            ("two_qubit_error", dict),
            ("one_qubit_error", dict),
        ):
            if key not in data:
                raise DeviceSchemaError(f"missing field '{key}'")
            if not isinstance(data[key], typ) or (typ is int and isinstance(data[key], bool)):
                raise DeviceSchemaError(f"field '{key}' must be of type {typ.__name__}")
        edges: list[tuple[int, int]] = []
        for item in data["edges"]:
            if not (isinstance(item, list) and len(item) == 2 and all(isinstance(v, int) for v in item)):
                raise DeviceSchemaError(f"field 'edges' has malformed entry {item!r}")
            edges.append(canonical_edge(*item))
        if len(set(edges)) != len(edges):
            raise DeviceValidationError("duplicate edge in 'edges'")
        e2: dict[tuple[int, int], float] = {}
        for key, val in data["two_qubit_error"].items():
            try:
                a, b = (int(t) for t in key.split("-"))
            except ValueError:
                raise DeviceSchemaError(f"field 'two_qubit_error' has malformed key {key!r}") from None
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise DeviceSchemaError(f"field 'two_qubit_error' value for {key!r} must be a number")
            e2[canonical_edge(a, b)] = float(val)
        e1: dict[int, float] = {}
        for key, val in data["one_qubit_error"].items():
            try:
                q = int(key)
            except ValueError:
                raise DeviceSchemaError(f"field 'one_qubit_error' has malformed key {key!r}") from None
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise DeviceSchemaError(f"field 'one_qubit_error' value for {key!r} must be a number")
            e1[q] = float(val)
        return cls(data["num_qubits"], frozenset(edges), e2, e1, data["name"])


def save_device(model: DeviceModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2, sort_keys=False) + "\n")


def load_device(path: str | Path) -> DeviceModel:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DeviceSchemaError(f"invalid JSON: {exc}") from exc
    return DeviceModel.from_dict(data)


# --- topologies -------------------------------------------------------------


def line_edges(n: int) -> tuple[int, list[tuple[int, int]]]:
    return n, [(i, i + 1) for i in range(n - 1)]


def ring_edges(n: int) -> tuple[int, list[tuple[int, int]]]:
    if n < 3:
        return line_edges(n)
    return n, [(i, (i + 1) % n) for i in range(n)]


def grid_edges(rows: int, cols: int) -> tuple[int, list[tuple[int, int]]]:
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return rows * cols, edges


def heavy_hex_edges(rows: int, cols: int) -> tuple[int, list[tuple[int, int]]]:
    """Heavy-hex lattice with ``rows x cols`` hexagonal cells.

    Built as a brick-wall hexagonal lattice whose every bond is subdivided by an
    extra (degree-2) qubit; dangling degree-1 sites are pruned so that e.g.
    ``(1, 1)`` is the 12-qubit ring. Qubits are numbered row-major by lattice
    coordinate.
    """
    vrows, vcols = rows + 1, 2 * cols + 2
    bonds = []
    for i in range(vrows):
        for j in range(vcols - 1):
            bonds.append(((2 * i, 2 * j), (2 * i, 2 * j + 2)))
    for i in range(vrows - 1):
        for j in range(vcols):
            if (i + j) % 2 == 1:
                bonds.append(((2 * i, 2 * j), (2 * i + 2, 2 * j)))
    adj: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for u, v in bonds:
        mid = ((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
        for a, b in ((u, mid), (mid, v)):
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
    leaves = [v for v, nb in adj.items() if len(nb) <= 1]
    while leaves:
        v = leaves.pop()
        if v not in adj:
            continue
        for u in adj.pop(v):
            adj[u].discard(v)
            if len(adj[u]) <= 1:
                leaves.append(u)
    order = {v: k for k, v in enumerate(sorted(adj))}
    edges = sorted({canonical_edge(order[u], order[v]) for u in adj for v in adj[u]})
    return len(order), edges


@dataclass(frozen=True)
class DeviceGenSpec:
    """Recipe for a synthetic device.

    Errors are log-normal around the given medians: ``median * exp(sigma * N(0, 1))``.
    """

    topology: str = "heavy-hex"
    dims: tuple[int, ...] = (3, 3)
    eps2: float = 0.01
    sigma2: float = 0.5
    eps1: float = 0.001
    sigma1: float = 0.5
    dead_fraction: float = 0.0
    seed: int = 0
    name: str | None = None

    def __post_init__(self) -> None:
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}; expected one of {TOPOLOGIES}")
        want = 2 if self.topology in ("heavy-hex", "grid") else 1
        if len(self.dims) != want:
            raise ValueError(f"topology {self.topology} takes {want} dimension(s), got {self.dims}")
        if any(int(d) < 1 for d in self.dims):
            raise ValueError(f"topology dimensions must be positive, got {self.dims}")
        for label, med in (("eps2", self.eps2), ("eps1", self.eps1)):
            if not 0.0 < med < 0.5:
                raise ValueError(f"{label} median must lie in (0, 0.5), got {med}")
        if self.sigma2 < 0 or self.sigma1 < 0:
            raise ValueError("dispersion must be non-negative")
        if not 0.0 <= self.dead_fraction <= 0.2:
            raise ValueError(f"dead_fraction must lie in [0, 0.2], got {self.dead_fraction}")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def _topology(spec: DeviceGenSpec) -> tuple[int, list[tuple[int, int]]]:
    if spec.topology == "heavy-hex":
        return heavy_hex_edges(*spec.dims)
    if spec.topology == "grid":
        return grid_edges(*spec.dims)
    if spec.topology == "ring":
        return ring_edges(spec.dims[0])
    return line_edges(spec.dims[0])


def generate_device(spec: DeviceGenSpec) -> DeviceModel:
    n, edge_list = _topology(spec)
    edges = sorted({canonical_edge(a, b) for a, b in edge_list})
    rng = np.random.default_rng(spec.seed)
    raw2 = spec.eps2 * np.exp(spec.sigma2 * rng.standard_normal(len(edges)))
    raw1 = spec.eps1 * np.exp(spec.sigma1 * rng.standard_normal(n))
    raw2 = np.clip(raw2, MIN_ERROR, DEAD_ERROR)
    raw1 = np.clip(raw1, MIN_ERROR, DEAD_ERROR)
    n_dead = int(math.floor(spec.dead_fraction * len(edges)))
    if n_dead:
        raw2[rng.choice(len(edges), size=n_dead, replace=False)] = DEAD_ERROR
    name = spec.name or f"{spec.topology}-{'x'.join(map(str, spec.dims))}-s{spec.seed}"
    return DeviceModel(
        num_qubits=n,
        edges=frozenset(edges),
        two_qubit_error={e: float(v) for e, v in zip(edges, raw2)},
        one_qubit_error={q: float(v) for q, v in enumerate(raw1)},
        name=name,
    )
