"""Per-block summaries of an encrypted block matrix.

Each function returns a BlockMatrix whose first column holds one statistic
per data row (other slots zero).  ``m_last`` is the length of the last row
when it is shorter than ``m``; the per-row normalizers are public plaintext
vectors folded into the final reduction mask.
"""

from __future__ import annotations

import numpy as np

from .compare import SignApproxParams, cmp
from .errors import ParameterError
from .layout import BlockLayout
from .matrix import BlockMatrix, cached_plain, repl_c, sum_c


def _layout(X: BlockMatrix, m: int, m_last: int | None) -> BlockLayout:
    m_last = m if m_last is None else m_last
    if not 1 <= m_last <= m or m > X.dim:
        raise ParameterError(f"invalid block sizes m={m}, m_last={m_last} for a {X.dim}-wide matrix")
    n = (X.rows - 1) * m + m_last
    return BlockLayout(n, m, X.rows, m_last, X.dim)


def _plain(X: BlockMatrix, L: BlockLayout, tag: str, build):
    return cached_plain(X.ctx, (tag, L.dim, L.n_b, L.m, L.m_last), build)


def block_mean(X: BlockMatrix, m: int, m_last: int | None = None) -> BlockMatrix:
    """Row sums scaled by 1/m (1/m_last on the last row).  One product."""
    L = _layout(X, m, m_last)
    w = _plain(X, L, "mean-w", lambda: L.col_weights(0))
    return X.with_backing(sum_c(X.backing, L.dim, out_mask=w), cols=1)


def block_variance(X: BlockMatrix, m: int, m_last: int | None = None) -> BlockMatrix:
    """Unbiased per-row variance: SumC((X - M)^2) / (m - 1)."""
    if m < 2 or (m_last is not None and m_last < 2):
        raise ParameterError("variance needs blocks of at least 2 points")
    L = _layout(X, m, m_last)
    mean = block_mean(X, m, m_last).backing
    M = repl_c(mean, L.dim)
    valid = _plain(X, L, "valid", lambda: L.row_prefix(0))
    D = (X.backing - M) * valid
    w = _plain(X, L, "var-w", lambda: L.col_weights(1))
    return X.with_backing(sum_c(D * D, L.dim, out_mask=w), cols=1)


def _turning_masks(L: BlockLayout):
    """Pair mask for the comparisons and the (b, w) offsets of F = w - (C + C<<1 - b)^2.

    On complete triplets b = w = 1, giving 1 - (c_i + c_{i+1} - 1)^2, which
    is 1 iff the two neighbouring comparisons differ (an up-down pattern).
    Where only one comparison reaches a column (the first column past the
    last triplet, and the last padded column which sees the next row's first
    comparison) b = 1/2 and w = 1/4, so F = c(1 - c) vanishes for a clean
    0/1 comparison.  Everywhere else b = w = 0 and F = 0.
    """
    pair = L.row_prefix(1)
    b = np.zeros((L.dim, L.dim))
    w = np.zeros((L.dim, L.dim))
    for i, n in enumerate(L.row_lengths()):
        b[i, : n - 2] = 1.0
        w[i, : n - 2] = 1.0
        for j in (n - 2, L.dim - 1):
            b[i, j] = 0.5
            w[i, j] = 0.25
    return pair, b.ravel(), w.ravel()


def turning_rates(
    X: BlockMatrix, m: int, params: SignApproxParams = SignApproxParams(), m_last: int | None = None
) -> BlockMatrix:
    """Fraction of up-down triplets per row, normalized by 1/(m - 2).

    One SIMD comparison of every point with its right neighbour is shared by
    the two overlapping pairs of each triplet.  Beyond the comparison this
    costs 2 products and log2(dim) + 2 rotations.
    """
    if m < 3 or (m_last is not None and m_last < 3):
        raise ParameterError("turning rates need blocks of at least 3 points")
    L = _layout(X, m, m_last)
    pair, b, w = (_plain(X, L, f"turn-{k}", lambda k=k: _turning_masks(L)[k]) for k in range(3))
    C = cmp(X.backing, X.backing << 1, params, out_mask=pair)
    A = C + (C << 1) - b
    F = w - A * A
    q = _plain(X, L, "turn-q", lambda: L.col_weights(2))
    return X.with_backing(sum_c(F, L.dim, out_mask=q), cols=1)
