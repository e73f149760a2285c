"""Enumeration of isomorphic layouts (graph monomorphisms) and overlap truncation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from ffzne.circuit import InteractionGraph
from ffzne.device import DeviceModel

Layout = tuple[int, ...]


@dataclass(frozen=True)
class LayoutSet:
    layouts: tuple[Layout, ...]
    device_name: str = ""
    circuit_hash: str = ""
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.layouts)

    def __iter__(self) -> Iterator[Layout]:
        return iter(self.layouts)

    def __getitem__(self, idx: int) -> Layout:
        return self.layouts[idx]

    def to_dict(self) -> dict:
        return {
            "device": self.device_name,
            "circuit_hash": self.circuit_hash,
            "truncated": self.truncated,
            "layouts": [list(lay) for lay in self.layouts],
        }

    @classmethod
    def from_dict(cls, data: dict) -> LayoutSet:
        return cls(
            tuple(tuple(int(q) for q in lay) for lay in data["layouts"]),
            data.get("device", ""),
            data.get("circuit_hash", ""),
            bool(data.get("truncated", False)),
        )


def save_layouts(layouts: LayoutSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(layouts.to_dict()) + "\n")


def load_layouts(path: str | Path) -> LayoutSet:
    return LayoutSet.from_dict(json.loads(Path(path).read_text()))


def _search_order(graph: InteractionGraph) -> list[int]:
    """Virtual vertices ordered so each one (after the first) has a placed neighbour.

    Starts from the highest-degree vertex; then repeatedly takes the vertex with the
    most already-placed neighbours, breaking ties by degree and then index.
    """
    adj = graph.neighbors()
    deg = [len(nb) for nb in adj]
    start = min(range(graph.num_vertices), key=lambda v: (-deg[v], v))
    order = [start]
    placed = {start}
    links = [0] * graph.num_vertices
    for u in adj[start]:
        links[u] += 1
    while len(order) < graph.num_vertices:
        v = min((u for u in range(graph.num_vertices) if u not in placed), key=lambda u: (-links[u], -deg[u], u))
        order.append(v)
        placed.add(v)
        for u in adj[v]:
            links[u] += 1
    return order


def iter_monomorphisms(graph: InteractionGraph, device: DeviceModel) -> Iterator[Layout]:
    """Yield every injective, edge-preserving map (as a mapping tuple) by backtracking."""
    n = graph.num_vertices
    if n > device.num_qubits:
        return
    adj = graph.neighbors()
    dadj = device.adjacency
    dsets = [frozenset(nb) for nb in dadj]
    order = _search_order(graph)
    # For each position: the earlier-placed neighbours whose images constrain it.
    anchors = []
    pos = {v: i for i, v in enumerate(order)}
    for i, v in enumerate(order):
        anchors.append([u for u in adj[v] if pos[u] < i])
    need = [len(adj[v]) for v in order]
    mapping = [-1] * n
    used = [False] * device.num_qubits

    def candidates(i: int):
        cons = anchors[i]
        if not cons:
            return range(device.num_qubits)
        first = dadj[mapping[cons[0]]]
        if len(cons) == 1:
            return first
        rest = [dsets[mapping[u]] for u in cons[1:]]
        return [p for p in first if all(p in s for s in rest)]

    def extend(i: int) -> Iterator[Layout]:
        if i == n:
            yield tuple(mapping)
            return
        v = order[i]
        for p in candidates(i):
            if used[p] or len(dadj[p]) < need[i]:
                continue
            used[p] = True
            mapping[v] = p
            yield from extend(i + 1)
            used[p] = False
        mapping[v] = -1

    yield from extend(0)


def enumerate_layouts(
    graph: InteractionGraph,
    device: DeviceModel,
    cap: int | None = None,
    circuit_hash: str = "",
) -> LayoutSet:
    """All monomorphisms of ``graph`` into the device coupling graph, sorted lexicographically.

    With ``cap`` the search stops after ``cap`` layouts and the result is flagged
    as truncated.
    """
    if cap is not None and cap < 1:
        raise ValueError("cap must be a positive integer")
    if not graph.is_connected():
        raise ValueError("interaction graph is disconnected; only connected circuits can be embedded")
    found: list[Layout] = []
    truncated = False
    for lay in iter_monomorphisms(graph, device):
        if cap is not None and len(found) == cap:
            truncated = True
            break
        found.append(lay)
    found.sort()
    return LayoutSet(tuple(found), device.name, circuit_hash, truncated)


def is_valid_layout(layout: Sequence[int], graph: InteractionGraph, device: DeviceModel) -> bool:
    if len(layout) != graph.num_vertices or len(set(layout)) != len(layout):
        return False
    if any(not 0 <= p < device.num_qubits for p in layout):
        return False
    return all(device.has_edge(layout[a], layout[b]) for a, b in graph.edges)


def overlap(l1: Sequence[int], l2: Sequence[int]) -> int:
    return len(set(l1) & set(l2))


def truncate_by_overlap(layouts: LayoutSet, eta: int, num_physical: int | None = None) -> LayoutSet:
    """Greedy filter: keep a layout iff it shares fewer than ``eta`` qubits with every kept one."""
    if eta < 1:
        raise ValueError("eta must be >= 1")
    if not layouts.layouts:
        return layouts
    width = num_physical or 1 + max(max(lay) for lay in layouts.layouts)
    images = np.zeros((len(layouts), width), dtype=np.int16)
    for row, lay in enumerate(layouts.layouts):
        images[row, list(lay)] = 1
    kept_rows: list[int] = []
    kept = np.zeros((len(layouts), width), dtype=np.int16)
    for row in range(len(layouts)):
        k = len(kept_rows)
        if k == 0 or int((kept[:k] @ images[row]).max()) < eta:
            kept[k] = images[row]
            kept_rows.append(row)
    return LayoutSet(
        tuple(layouts.layouts[r] for r in kept_rows),
        layouts.device_name,
        layouts.circuit_hash,
        layouts.truncated,
    )
