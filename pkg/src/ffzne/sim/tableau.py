"""Aaronson-Gottesman stabilizer tableau with computational-basis measurement."""

from __future__ import annotations

import numpy as np

from ffzne.sim.pauli import PauliBatch


def _g(x1, z1, x2, z2):
    x1, z1, x2, z2 = (np.asarray(v, dtype=np.int8) for v in (x1, z1, x2, z2))
    return np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1), np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)),
    )


class Tableau:
    """Rows 0..n-1 are destabilizers, rows n..2n-1 stabilizers of |0...0>."""

    def __init__(self, n: int):
        self.n = n
        self.rows = PauliBatch.zeros(2 * n, n)
        idx = np.arange(n)
        self.rows.x[idx, idx] = True
        self.rows.z[n + idx, idx] = True

    def apply(self, kind: str, qubits: tuple[int, ...]) -> None:
        self.rows.apply(kind, qubits)

    def _rowsum(self, x, z, r, i: int):
        rows = self.rows
        total = 2 * int(r) + 2 * int(rows.sign[i]) + int(_g(rows.x[i], rows.z[i], x, z).sum())
        return x ^ rows.x[i], z ^ rows.z[i], (total % 4) == 2

    def measure(self, a: int, rng: np.random.Generator | None = None) -> int:
        """Measure qubit ``a`` in Z. Random outcomes come from ``rng`` (0 when None)."""
        n, rows = self.n, self.rows
        hits = np.nonzero(rows.x[n:, a])[0]
        if hits.size:
            p = n + int(hits[0])
            for i in range(2 * n):
                if i != p and rows.x[i, a]:
                    rows.x[i], rows.z[i], rows.sign[i] = self._rowsum(rows.x[i], rows.z[i], rows.sign[i], p)
            rows.x[p - n], rows.z[p - n], rows.sign[p - n] = rows.x[p].copy(), rows.z[p].copy(), rows.sign[p]
            rows.x[p] = False
            rows.z[p] = False
            rows.z[p, a] = True
            outcome = 0 if rng is None else int(rng.integers(2))
            rows.sign[p] = bool(outcome)
            return outcome
        x = np.zeros(n, bool)
        z = np.zeros(n, bool)
        r = False
        for i in range(n):
            if rows.x[i, a]:
                x, z, r = self._rowsum(x, z, r, i + n)
        return int(r)

    def measure_all(self, rng: np.random.Generator | None = None) -> np.ndarray:
        return np.array([self.measure(q, rng) for q in range(self.n)], dtype=np.uint8)
