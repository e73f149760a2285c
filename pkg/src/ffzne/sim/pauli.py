"""Batched Pauli operators in symplectic form and Clifford conjugation rules.

A batch holds ``K`` n-qubit Paulis as boolean ``x``/``z`` matrices of shape
``(K, n)`` plus a sign bit per row (``Y`` is encoded as x=z=1 with the
Aaronson-Gottesman phase convention). All updates are in-place and act on a
whole batch at once, which serves both the Heisenberg path (one row per
observable term) and the Pauli-frame sampler (one row per shot).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LETTERS = "IXYZ"
_LETTER_BITS = {"I": (False, False), "X": (True, False), "Y": (True, True), "Z": (False, True)}


@dataclass
class PauliBatch:
    x: np.ndarray
    z: np.ndarray
    sign: np.ndarray

    @classmethod
    def zeros(cls, k: int, n: int) -> PauliBatch:
        return cls(np.zeros((k, n), bool), np.zeros((k, n), bool), np.zeros(k, bool))

    @classmethod
    def from_strings(cls, strings: list[str]) -> PauliBatch:
        n = len(strings[0])
        batch = cls.zeros(len(strings), n)
        for row, s in enumerate(strings):
            if len(s) != n:
                raise ValueError("Pauli strings in a batch must share a length")
            for q, ch in enumerate(s):
                batch.x[row, q], batch.z[row, q] = _LETTER_BITS[ch]
        return batch

    def copy(self) -> PauliBatch:
        return PauliBatch(self.x.copy(), self.z.copy(), self.sign.copy())

    def strings(self) -> list[str]:
        codes = self.x.astype(np.int8) + 2 * self.z.astype(np.int8)
        table = np.array(["I", "X", "Z", "Y"])
        return ["".join(row) for row in table[codes]]

    # Forward conjugation P -> U P U^dag.

    def h(self, q: int) -> None:
        x, z = self.x[:, q].copy(), self.z[:, q].copy()
        self.sign ^= x & z
        self.x[:, q], self.z[:, q] = z, x

    def s(self, q: int) -> None:
        x = self.x[:, q]
        self.sign ^= x & self.z[:, q]
        self.z[:, q] ^= x

    def sdg(self, q: int) -> None:
        x = self.x[:, q]
        self.sign ^= x & ~self.z[:, q]
        self.z[:, q] ^= x

    def pauli_x(self, q: int) -> None:
        self.sign ^= self.z[:, q]

    def pauli_y(self, q: int) -> None:
        self.sign ^= self.x[:, q] ^ self.z[:, q]

    def pauli_z(self, q: int) -> None:
        self.sign ^= self.x[:, q]

    def cx(self, c: int, t: int) -> None:
        xc, zc, xt, zt = self.x[:, c], self.z[:, c], self.x[:, t], self.z[:, t]
        self.sign ^= xc & zt & ~(xt ^ zc)
        self.x[:, t] = xt ^ xc
        self.z[:, c] = zc ^ zt

    def apply(self, kind: str, qubits: tuple[int, ...]) -> None:
        if kind == "CX":
            self.cx(*qubits)
        else:
            _SINGLE[kind](self, qubits[0])

    def apply_inverse(self, kind: str, qubits: tuple[int, ...]) -> None:
        """Conjugation by the gate's inverse, P -> U^dag P U (Heisenberg step)."""
        if kind == "S":
            self.sdg(qubits[0])
        elif kind == "Sdg":
            self.s(qubits[0])
        else:
            self.apply(kind, qubits)

    def support_hit(self, qubits: tuple[int, ...]) -> np.ndarray:
        """Rows whose restriction to ``qubits`` is not the identity."""
        cols = list(qubits)
        return (self.x[:, cols] | self.z[:, cols]).any(axis=1)

    def vacuum_expectation(self) -> np.ndarray:
        """<0...0| P |0...0> per row: +-1 for Z-type strings, 0 otherwise."""
        diagonal = ~self.x.any(axis=1)
        return np.where(diagonal, np.where(self.sign, -1.0, 1.0), 0.0)


_SINGLE = {
    "H": PauliBatch.h,
    "S": PauliBatch.s,
    "Sdg": PauliBatch.sdg,
    "X": PauliBatch.pauli_x,
    "Y": PauliBatch.pauli_y,
    "Z": PauliBatch.pauli_z,
}
