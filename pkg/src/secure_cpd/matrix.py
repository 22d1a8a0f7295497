"""Recursive rotate-and-add kernels over a row-major, power-of-two padded square.

Slot ``r*N + c`` of the backing vector holds entry (r, c) of an N x N matrix.
Each kernel uses exactly log2(N) rotations; the reducing and transposing ones
finish with a single plaintext mask product that zeroes everything except the
result row or column.  Replication needs no mask.

The kernels assume the backing vector is zero outside the N x N square (or at
least that the slots they pull from are), which holds for every matrix built
with :meth:`BlockMatrix.from_array`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .backend import CipherVector, EvalContext, PlainVector, encrypt, mul
from .errors import CapacityError, ParameterError

_DEFAULT = object()


def next_pow2(n: int) -> int:
    if n < 1:
        raise ParameterError(f"dimension must be positive, got {n}")
    return 1 << (int(n) - 1).bit_length()


def log2_int(N: int) -> int:
    if N < 1 or N & (N - 1):
        raise ParameterError(f"{N} is not a power of two")
    return N.bit_length() - 1


# -- plaintext masks -------------------------------------------------------

_mask_cache: dict[tuple, PlainVector] = {}
_mask_lock = threading.Lock()


def cached_plain(ctx: EvalContext, key: tuple, build: Callable[[], np.ndarray]) -> PlainVector:
    """Build a public vector once per (slot_count, key) and reuse it."""
    full_key = (ctx.slot_count,) + tuple(key)
    pv = _mask_cache.get(full_key)
    if pv is None:
        pv = ctx.plain(build())
        with _mask_lock:
            pv = _mask_cache.setdefault(full_key, pv)
    return pv


def _grid(N: int, fill) -> np.ndarray:
    G = np.zeros((N, N))
    fill(G)
    return G.ravel()


def mask(ctx: EvalContext, N: int, kind: str) -> PlainVector:
    """``row0``, ``col0`` or ``diag`` indicator of an N x N square."""
    if kind == "row0":
        return cached_plain(ctx, (N, kind), lambda: _grid(N, lambda G: G.__setitem__((0, slice(None)), 1.0)))
    if kind == "col0":
        return cached_plain(ctx, (N, kind), lambda: _grid(N, lambda G: G.__setitem__((slice(None), 0), 1.0)))
    if kind == "diag":
        return cached_plain(ctx, (N, kind), lambda: np.eye(N).ravel())
    raise ParameterError(f"unknown mask kind {kind!r}")


# -- raw kernels on a CipherVector ----------------------------------------

def _finish(X: CipherVector, default: PlainVector, m) -> CipherVector:
    if m is None:
        return X
    return mul(X, default if m is _DEFAULT else m)


def sum_r(X: CipherVector, N: int, out_mask=_DEFAULT) -> CipherVector:
    """Column sums into row 0.  ``out_mask`` replaces the row-0 mask (None skips it)."""
    for i in range(log2_int(N)):
        X = X + (X << (N << i))
    return _finish(X, mask(X.ctx, N, "row0"), out_mask)


def sum_c(X: CipherVector, N: int, out_mask=_DEFAULT) -> CipherVector:
    """Row sums into column 0."""
    for i in range(log2_int(N)):
        X = X + (X << (1 << i))
    return _finish(X, mask(X.ctx, N, "col0"), out_mask)


def repl_r(X: CipherVector, N: int) -> CipherVector:
    """Copy row 0 into every row."""
    for i in range(log2_int(N)):
        X = X + (X >> (N << i))
    return X


def repl_c(X: CipherVector, N: int) -> CipherVector:
    """Copy column 0 into every column."""
    for i in range(log2_int(N)):
        X = X + (X >> (1 << i))
    return X


def trans_r(X: CipherVector, N: int, out_mask=_DEFAULT) -> CipherVector:
    """Row vector (row 0) to column vector (column 0)."""
    for i in range(1, log2_int(N) + 1):
        X = X + (X >> (N * (N - 1) >> i))
    return _finish(X, mask(X.ctx, N, "col0"), out_mask)


def trans_c(X: CipherVector, N: int, out_mask=_DEFAULT) -> CipherVector:
    """Column vector (column 0) to row vector (row 0)."""
    for i in range(1, log2_int(N) + 1):
        X = X + (X << (N * (N - 1) >> i))
    return _finish(X, mask(X.ctx, N, "row0"), out_mask)


# -- BlockMatrix view ------------------------------------------------------

@dataclass(frozen=True)
class BlockMatrix:
    """Logical rows x cols matrix stored in an N x N padded square."""

    backing: CipherVector
    rows: int
    cols: int
    dim: int

    def __post_init__(self):
        if self.dim != next_pow2(self.dim):
            raise ParameterError(f"padded dimension {self.dim} is not a power of two")
        if self.rows > self.dim or self.cols > self.dim:
            raise ParameterError("logical shape exceeds padded dimension")
        if self.dim * self.dim > self.backing.ctx.slot_count:
            raise CapacityError(f"{self.dim}x{self.dim} matrix needs more than {self.backing.ctx.slot_count} slots")

    @property
    def ctx(self) -> EvalContext:
        return self.backing.ctx

    @classmethod
    def from_array(cls, A, ctx: EvalContext, dim: int | None = None) -> "BlockMatrix":
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        rows, cols = A.shape
        N = dim or next_pow2(max(rows, cols))
        if N * N > ctx.slot_count:
            raise CapacityError(f"{N}x{N} matrix needs more than {ctx.slot_count} slots")
        P = np.zeros((N, N))
        P[:rows, :cols] = A
        return cls(encrypt(P.ravel(), ctx), rows, cols, N)

    def with_backing(self, X: CipherVector, rows=None, cols=None) -> "BlockMatrix":
        return BlockMatrix(X, self.rows if rows is None else rows, self.cols if cols is None else cols, self.dim)

    def padded(self) -> np.ndarray:
        N = self.dim
        return np.array(self.backing.slots[: N * N]).reshape(N, N)

    def to_array(self) -> np.ndarray:
        return self.padded()[: self.rows, : self.cols]


def sum_axis(X: BlockMatrix, axis: str) -> BlockMatrix:
    if axis == "rows":
        return X.with_backing(sum_r(X.backing, X.dim), rows=1)
    if axis == "cols":
        return X.with_backing(sum_c(X.backing, X.dim), cols=1)
    raise ParameterError(f"axis must be 'rows' or 'cols', got {axis!r}")


def repl_axis(X: BlockMatrix, axis: str) -> BlockMatrix:
    if axis == "rows":
        return X.with_backing(repl_r(X.backing, X.dim), rows=X.dim)
    if axis == "cols":
        return X.with_backing(repl_c(X.backing, X.dim), cols=X.dim)
    raise ParameterError(f"axis must be 'rows' or 'cols', got {axis!r}")


def trans(X: BlockMatrix, direction: str) -> BlockMatrix:
    if direction == "row_to_col":
        return BlockMatrix(trans_r(X.backing, X.dim), X.cols, 1, X.dim)
    if direction == "col_to_row":
        return BlockMatrix(trans_c(X.backing, X.dim), 1, X.rows, X.dim)
    raise ParameterError(f"direction must be 'row_to_col' or 'col_to_row', got {direction!r}")
