"""Encrypted CUSUM over a column of block statistics.

With s_1..s_nb in [0, 1], Delta_k = S_k - (k / n_b) * S_nb satisfies
|Delta_k| <= n_b / 4, so U_k = (4 Delta_k / n_b)^2 lies in [0, 1] and can be
fed to the comparator directly.  Squaring replaces the absolute value; it is
monotone in |Delta_k| and therefore has the same argmax.
"""

from __future__ import annotations

import numpy as np

from .backend import CipherVector
from .compare import SignApproxParams
from .errors import ParameterError
from .matrix import BlockMatrix, cached_plain, repl_c, sum_r
from .rank import argmax_fast


def partial_sums(S: BlockMatrix) -> CipherVector:
    """Row 0 slot j gets s_1 + ... + s_{j+1}.  Other rows hold junk.

    Replicate the column, keep the upper triangle (j >= i), sum down the
    columns: 2 log2(dim) rotations and 1 product.
    """
    N, n_b = S.dim, S.rows

    def build():
        T = np.zeros((N, N))
        T[:n_b, :n_b] = np.triu(np.ones((n_b, n_b)))
        return T.ravel()

    triu = cached_plain(S.ctx, ("triu", N, n_b), build)
    return sum_r(repl_c(S.backing, N) * triu, N, out_mask=None)


def cusum_scores(S: BlockMatrix, bound: float = 1.0) -> CipherVector:
    """Slots 0..n_b-1 get U_k = (4 Delta_k / (bound * n_b))^2; every other slot is 0.

    ``bound`` is a public upper limit on the statistics (they must lie in
    [0, bound]); it keeps U inside the comparator's domain.
    """
    N, n_b = S.dim, S.rows
    if n_b < 1:
        raise ParameterError("need at least one block")
    if not bound > 0:
        raise ParameterError("bound must be positive")
    scale = 4.0 / (bound * n_b)
    S_P = partial_sums(S)
    S_T = repl_c(sum_r(S.backing, N, out_mask=None), N)

    def coeffs(which):
        def build():
            v = np.zeros(N * N)
            k = np.arange(1, n_b + 1)
            v[:n_b] = scale if which == "a" else -scale * k / n_b
            return v

        return build

    a = cached_plain(S.ctx, ("cusum-a", N, n_b, scale), coeffs("a"))
    b = cached_plain(S.ctx, ("cusum-b", N, n_b, scale), coeffs("b"))
    D = S_P * a + S_T * b
    return D * D


def cusum(
    S: BlockMatrix,
    n_b: int | None = None,
    params: SignApproxParams = SignApproxParams(),
    bound: float = 1.0,
) -> CipherVector:
    """Approximate one-hot of argmax_k Delta_k^2 in slots 0..n_b-1.

    The scores already sit in the first n_b slots of an otherwise empty
    vector, so reading them as the first row of an n_b' x n_b' square
    (n_b' = next power of two) costs nothing before the column-product argmax.
    """
    n_b = S.rows if n_b is None else n_b
    if n_b != S.rows:
        raise ParameterError(f"n_b={n_b} does not match the {S.rows} rows of S")
    return argmax_fast(cusum_scores(S, bound), n_b, params)
