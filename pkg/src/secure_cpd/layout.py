"""Block geometry shared by the encrypted pipeline and the plaintext oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

CHANGE_TYPES = ("mean", "variance", "frequency")
MIN_BLOCK = {"mean": 1, "variance": 2, "frequency": 3}


def check_change_type(change_type: str) -> str:
    if change_type not in CHANGE_TYPES:
        raise ParameterError(f"change type must be one of {CHANGE_TYPES}, got {change_type!r}")
    return change_type


def default_block_size(n: int) -> int:
    """floor(sqrt(n)), snapped to the nearest power of two if that is within 25%."""
    m = max(1, math.isqrt(int(n)))
    lo = 1 << (m.bit_length() - 1)
    hi = lo << 1
    p = lo if m - lo <= hi - m else hi
    return p if abs(p - m) <= 0.25 * m else m


@dataclass(frozen=True)
class BlockLayout:
    """n points cut into n_b rows of m (the last row holds m_last <= m).

    A trailing partial block too short for the statistic (fewer than 2 points
    for a variance, 3 for turning rates) is dropped; ``n_used`` counts the
    points that take part.
    """

    n: int
    m: int
    n_b: int
    m_last: int
    dim: int

    @classmethod
    def build(cls, n: int, m: int, change_type: str = "mean") -> "BlockLayout":
        check_change_type(change_type)
        need = MIN_BLOCK[change_type]
        if m < need:
            raise ParameterError(f"block size {m} too small for {change_type} (needs >= {need})")
        if n < m:
            raise ParameterError(f"series of length {n} is shorter than one block of {m}")
        n_b = -(-n // m)
        m_last = n - (n_b - 1) * m
        if m_last < need:
            n_b -= 1
            m_last = m
        dim = 1 << (max(n_b, m) - 1).bit_length()
        return cls(n, m, n_b, m_last, dim)

    @property
    def n_used(self) -> int:
        return (self.n_b - 1) * self.m + self.m_last

    @property
    def slot_count(self) -> int:
        return self.dim * self.dim

    def row_lengths(self) -> np.ndarray:
        lens = np.full(self.n_b, self.m)
        lens[-1] = self.m_last
        return lens

    def blocks(self, values) -> list:
        x = np.asarray(values, dtype=np.float64)[: self.n_used]
        return [x[i * self.m : i * self.m + L] for i, L in enumerate(self.row_lengths())]

    def to_matrix(self, values) -> np.ndarray:
        """Padded dim x dim array, zero outside the data."""
        P = np.zeros((self.dim, self.dim))
        for i, b in enumerate(self.blocks(values)):
            P[i, : b.size] = b
        return P

    def col_weights(self, offset: int) -> np.ndarray:
        """Column-0 vector with 1/(L - offset) for each row of length L."""
        P = np.zeros((self.dim, self.dim))
        P[: self.n_b, 0] = 1.0 / (self.row_lengths() - offset)
        return P.ravel()

    def row_prefix(self, width_offset: int, value: float = 1.0) -> np.ndarray:
        """1 on columns [0, L - width_offset) of each data row."""
        P = np.zeros((self.dim, self.dim))
        for i, L in enumerate(self.row_lengths()):
            P[i, : max(L - width_offset, 0)] = value
        return P.ravel()
