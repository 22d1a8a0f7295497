"""Encrypted ranking and one-hot argmax over the first N slots of a ciphertext.

All three routines start from the same all-pairs comparison matrix on a
dim x dim square (dim = next power of two >= N): entry (i, j) is
cmp(x_j, x_i), i.e. "is column element j larger than row element i".

* :func:`rank` sums each column, giving #{i : x_i < x_j} + 1/2, then adds 1/2.
* :func:`argmax_baseline` feeds those ranks to the equality indicator for N.
* :func:`argmax_fast` instead multiplies each column down its rows.  The
  column of the maximum holds only ones (the diagonal 1/2 is lifted to 1 by
  a public additive correction) while every other column contains at least
  one ~0 factor, so log2(dim) products leave a one-hot row.

Input precondition: the vector is zero outside its first N slots.
Outputs are only meaningful in slots 0..N-1; other slots may carry junk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import CipherVector, EvalContext, decode
from .compare import SignApproxParams, cmp, indicator
from .errors import ParameterError
from .matrix import cached_plain, log2_int, next_pow2, repl_c, repl_r, sum_r, trans_r


def _check(X: CipherVector, N: int) -> int:
    if N < 1:
        raise ParameterError("N must be positive")
    dim = next_pow2(N)
    if dim * dim > X.ctx.slot_count:
        raise ParameterError(f"a {dim}x{dim} comparison matrix does not fit in {X.ctx.slot_count} slots")
    return dim


def _region(ctx: EvalContext, dim: int, N: int):
    def build():
        G = np.zeros((dim, dim))
        G[:N, :N] = 1.0
        return G.ravel()

    return cached_plain(ctx, ("region", dim, N), build)


def _first_row(ctx: EvalContext, dim: int, N: int, value: float = 1.0):
    def build():
        v = np.zeros(dim * dim)
        v[:N] = value
        return v

    return cached_plain(ctx, ("row-prefix", dim, N, value), build)


def comparison_matrix(X: CipherVector, N: int, params: SignApproxParams = SignApproxParams()) -> CipherVector:
    """Masked all-pairs comparison; zero outside the logical N x N block.

    Costs the transposition mask plus one cmp: ``params.mults + 1`` products.
    """
    dim = _check(X, N)
    X_R = repl_r(X, dim)
    X_C = repl_c(trans_r(X, dim), dim)
    return cmp(X_R, X_C, params, out_mask=_region(X.ctx, dim, N))


def rank(X: CipherVector, N: int, params: SignApproxParams = SignApproxParams()) -> CipherVector:
    """Slot j (< N) gets the rank of x_j, 1 = smallest.  Ties give half ranks."""
    dim = _check(X, N)
    C = comparison_matrix(X, N, params)
    return sum_r(C, dim) + _first_row(X.ctx, dim, N, 0.5)


def argmax_baseline(X: CipherVector, N: int, params: SignApproxParams = SignApproxParams()) -> CipherVector:
    """Rank, then the equality indicator at N.

    The column sums are left unmasked (rows other than the first only hold
    partial sums, which stay inside the indicator's input range) and the
    row mask is folded into the indicator, so this spends 2*nu + 1 products
    on top of the comparison matrix.
    """
    dim = _check(X, N)
    C = comparison_matrix(X, N, params)
    R = sum_r(C, dim, out_mask=None) + 0.5
    return indicator(R, N, params, out_mask=_first_row(X.ctx, dim, N))


def argmax_fast(X: CipherVector, N: int, params: SignApproxParams = SignApproxParams()) -> CipherVector:
    """Column-product argmax: log2(dim) products on top of the comparison matrix."""
    dim = _check(X, N)
    ctx = X.ctx
    region = _region(ctx, dim, N)

    def build():
        G = 1.0 - region.slots[: dim * dim].reshape(dim, dim)
        G[np.arange(N), np.arange(N)] += 0.5
        return G.ravel()

    # padding rows become neutral ones, the diagonal's 1/2 becomes 1
    correction = cached_plain(ctx, ("argmax-correction", dim, N), build)
    C = comparison_matrix(X, N, params) + correction
    for i in range(log2_int(dim)):
        C = C * (C << (dim << i))
    return C


@dataclass(frozen=True)
class OneHotReading:
    index: int  # 0-based
    confidence_ok: bool
    top: float
    runner_up: float
    clean: bool  # exactly one slot above 1/2


def read_one_hot(vec, N: int, rel_margin: float = 1e-6) -> OneHotReading:
    """Recover the index from an approximate one-hot vector.

    The index is the largest of the first N slots.  Confidence requires the
    top value to beat the runner-up by a relative margin; a flat output (for
    instance from a constant series) fails it.
    """
    v = decode(vec)[:N] if isinstance(vec, CipherVector) else np.asarray(vec, dtype=np.float64)[:N]
    if v.size == 0:
        raise ParameterError("empty one-hot vector")
    idx = int(np.argmax(v))
    top = float(v[idx])
    runner = float(np.max(np.delete(v, idx))) if v.size > 1 else 0.0
    ok = bool(np.isfinite(top) and top > 0 and top > runner * (1 + rel_margin))
    return OneHotReading(idx, ok, top, runner, int(np.sum(v > 0.5)) == 1)
