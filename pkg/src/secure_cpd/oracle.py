"""Exact plaintext reference for ordinal patterns, block statistics and CUSUM."""

from __future__ import annotations

from collections import Counter
from itertools import permutations

import numpy as np

from .errors import ParameterError
from .layout import BlockLayout, check_change_type

# the four non-monotone order-2 patterns: up then down, or down then up
TURNING_PATTERNS = frozenset({(1, 3, 2), (3, 1, 2), (2, 3, 1), (2, 1, 3)})


def ordinal_pattern(window) -> tuple:
    """Rank tuple of the window (1 = smallest); ties keep first-occurrence order."""
    w = np.asarray(window, dtype=np.float64)
    order = np.argsort(w, kind="stable")
    ranks = np.empty(w.size, dtype=int)
    ranks[order] = np.arange(1, w.size + 1)
    return tuple(int(r) for r in ranks)


def pattern_histogram(ts, r: int) -> dict:
    """Empirical pattern frequencies over all windows of length r+1, divided by n."""
    x = np.asarray(ts, dtype=np.float64)
    n = x.size
    if r < 1 or n <= r:
        raise ParameterError(f"need n > r >= 1, got n={n}, r={r}")
    counts = Counter(ordinal_pattern(x[t : t + r + 1]) for t in range(n - r))
    table = {p: 0.0 for p in permutations(range(1, r + 2))}
    for p, c in counts.items():
        table[p] = c / n
    return table


def turning_flags(block) -> np.ndarray:
    """Per-triplet membership in TURNING_PATTERNS, pattern by pattern."""
    b = np.asarray(block, dtype=np.float64)
    return np.array([ordinal_pattern(b[i : i + 3]) in TURNING_PATTERNS for i in range(b.size - 2)])


def turning_rate(block) -> float:
    """Up-down triplet count over m - 2.

    Under first-occurrence tie-breaking, x_i ranks below x_{i+1} exactly when
    x_i <= x_{i+1}, so a triplet turns iff consecutive steps disagree.
    """
    b = np.asarray(block, dtype=np.float64)
    if b.size < 3:
        raise ParameterError("turning rate needs at least 3 points")
    up = b[:-1] <= b[1:]
    return float(np.count_nonzero(up[:-1] != up[1:])) / (b.size - 2)


def block_statistics(values, m: int, change_type: str) -> np.ndarray:
    check_change_type(change_type)
    layout = BlockLayout.build(len(values), m, change_type)
    blocks = layout.blocks(values)
    if change_type == "mean":
        return np.array([b.mean() for b in blocks])
    if change_type == "variance":
        return np.array([b.var(ddof=1) for b in blocks])
    return np.array([turning_rate(b) for b in blocks])


def cusum_trace(s) -> np.ndarray:
    """|S_k - (k/n_b) S_nb| for k = 1..n_b."""
    s = np.asarray(s, dtype=np.float64)
    k = np.arange(1, s.size + 1)
    csum = np.cumsum(s)
    return np.abs(csum - k / s.size * csum[-1])


def cpd_plain(ts, m: int, change_type: str, rtol: float = 1e-12):
    """(tau_block, trace); tau_block is 1-based, or None when the trace is flat."""
    s = block_statistics(ts, m, change_type)
    trace = cusum_trace(s)
    scale = max(float(np.max(np.abs(s))), 1e-300) * s.size
    if trace.max() <= rtol * scale:
        return None, trace
    return int(np.argmax(trace)) + 1, trace


def normalized_scores(trace, n_b: int | None = None) -> np.ndarray:
    """(4 Delta / n_b)^2, the quantity the encrypted argmax sees."""
    trace = np.asarray(trace, dtype=np.float64)
    n_b = trace.size if n_b is None else n_b
    return (4.0 * trace / n_b) ** 2


def top_two_gap(scores) -> float:
    u = np.sort(np.asarray(scores, dtype=np.float64))
    return float(u[-1] - u[-2]) if u.size > 1 else float("inf")
