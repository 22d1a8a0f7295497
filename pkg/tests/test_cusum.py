import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secure_cpd.backend import EvalContext, decode
from secure_cpd.compare import resolution_gamma
from secure_cpd.cusum import cusum, cusum_scores, partial_sums
from secure_cpd.matrix import BlockMatrix, next_pow2
from secure_cpd.oracle import cusum_trace, normalized_scores
from secure_cpd.rank import read_one_hot


def column_matrix(s, dim=None):
    s = np.asarray(s, dtype=float)
    N = dim or next_pow2(s.size)
    ctx = EvalContext(N * N)
    return BlockMatrix.from_array(s[:, None], ctx, N)


def test_partial_sums_examples():
    for s, want in (([1, 1, 1, 1], [1, 2, 3, 4]), ([0, 0, 0], [0, 0, 0]), ([0.2, 0.5, 0.1], [0.2, 0.7, 0.8])):
        S = column_matrix(s)
        assert decode(partial_sums(S))[: len(s)] == pytest.approx(want)


def test_partial_sums_cost_n_b_100():
    S = column_matrix(np.random.default_rng(0).uniform(size=100), dim=128)
    partial_sums(S)
    c = S.ctx.counters
    assert (c.rotations, c.mults) == (14, 1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=64))
def test_scores_match_oracle(s):
    S = column_matrix(s)
    U = decode(cusum_scores(S))
    want = normalized_scores(cusum_trace(s))
    assert np.allclose(U[: len(s)], want, atol=1e-12)
    assert not U[len(s) :].any()


def test_cusum_examples():
    for s, tau in (([0, 0, 1, 1], 2), ([0, 0, 0, 1, 1, 1, 1, 1], 3)):
        H = cusum(column_matrix(s))
        r = read_one_hot(H, len(s))
        assert r.confidence_ok and r.index + 1 == tau
        assert np.nonzero(decode(H)[: len(s)] > 0.5)[0].tolist() == [tau - 1]


def test_constant_statistics_fail_confidence():
    H = cusum(column_matrix([0.3] * 8))
    assert not read_one_hot(H, 8).confidence_ok


def test_bound_and_abs_square_equivalence():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n_b = int(rng.integers(1, 300))
        s = rng.uniform(size=n_b) ** rng.uniform(0.2, 5)
        d = cusum_trace(s)
        assert d.max() <= n_b / 4 + 1e-12
        assert np.argmax(d) == np.argmax(d**2)


def _step_stats():
    rng = np.random.default_rng(5)
    return np.r_[rng.uniform(0, 0.3, 10), rng.uniform(0.6, 1.0, 6)]


@pytest.mark.parametrize("c", [0.1, 1.0, 3.0])
def test_scale_invariance(c):
    s = _step_stats()
    base = read_one_hot(cusum(column_matrix(s)), 16).index
    assert np.argmax(cusum_trace(c * s)) == base
    # statistics in [0, c] are declared with the public bound max(1, c)
    r = read_one_hot(cusum(column_matrix(c * s), bound=max(1.0, c)), 16)
    assert r.confidence_ok and r.index == base


def test_statistics_outside_declared_bound_are_flagged():
    with np.errstate(over="ignore", invalid="ignore"):
        r = read_one_hot(cusum(column_matrix(3.0 * _step_stats())), 16)
    assert not r.confidence_ok


def test_encrypted_matches_oracle_above_gamma():
    gamma = resolution_gamma()
    rng = np.random.default_rng(9)
    checked = 0
    for _ in range(200):
        n_b = int(rng.integers(4, 64))
        k = int(rng.integers(1, n_b))
        s = np.r_[rng.uniform(0, 0.5, k), rng.uniform(0.3, 1, n_b - k)]
        U = normalized_scores(cusum_trace(s))
        top2 = np.sort(U)[-2:]
        if top2[1] - top2[0] < gamma:
            continue
        checked += 1
        assert read_one_hot(cusum(column_matrix(s)), n_b).index == int(np.argmax(U))
    assert checked >= 50
