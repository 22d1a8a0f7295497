import numpy as np
import pytest

from secure_cpd.datagen import gen_series
from secure_cpd.errors import DepthOverflowError, ParameterError
from secure_cpd.layout import BlockLayout, default_block_size
from secure_cpd.oracle import cpd_plain
from secure_cpd.pipeline import CPDConfig, TimeSeries, cpd, encode_matrix, normalize
from secure_cpd.backend import EvalContext


def bounded(ts):
    return TimeSeries(ts.values, (float(ts.values.min()), float(ts.values.max())), ts.name)


def test_normalize():
    ts = normalize(TimeSeries([-200, 0, 200], (-200, 200)))
    assert ts.values.tolist() == [0, 0.5, 1]
    assert normalize(TimeSeries([3.0] * 4, (2, 4))).values.tolist() == [0.5] * 4
    with pytest.warns(UserWarning, match="clamped"):
        ts = normalize(TimeSeries([-1.0, 0.5, 9.0], (0, 1)))
    assert ts.values.tolist() == [0, 0.5, 1] and ts.clamped == 2
    with pytest.raises(ParameterError):
        TimeSeries([1.0], (1, 1))


def test_missing_bounds_fall_back_with_caveat():
    with pytest.warns(UserWarning, match="private"):
        ts = normalize(TimeSeries([1.0, 3.0, 2.0]))
    assert ts.values.tolist() == [0, 1, 0.5]
    assert ts.bounds_source == "data"


def test_encode_matrix_shapes():
    ctx = EvalContext(1 << 16)
    X, L = encode_matrix(TimeSeries(np.linspace(0, 1, 9), (0, 1)), 3, ctx)
    assert (X.rows, X.cols, X.dim) == (3, 3, 4)
    X, L = encode_matrix(TimeSeries(np.linspace(0, 1, 10), (0, 1)), 3, ctx)
    assert (L.n_b, L.m_last) == (4, 1)
    L = BlockLayout.build(40000, 200)
    assert (L.n_b, L.m, L.dim) == (200, 200, 256)


def test_default_block_size():
    assert default_block_size(40000) == 200
    assert default_block_size(10000) == 100
    assert default_block_size(1000) == 32
    assert default_block_size(1_000_000) == 1024


def test_step_series_mean():
    x = np.r_[np.zeros(50), np.ones(50)]
    r = cpd(TimeSeries(x, (0, 1)), CPDConfig("mean", block_size=10))
    assert r.confidence_ok and r.tau_block == 5 and r.tau_index == 50


def test_constant_series_is_not_an_index():
    r = cpd(TimeSeries(np.full(100, 1.0), (0, 2)), CPDConfig("mean", block_size=10))
    assert not r.confidence_ok and r.tau_block is None and r.tau_index is None


def test_too_short():
    with pytest.raises(ParameterError):
        cpd(TimeSeries(np.arange(8.0), (0, 8)))


@pytest.mark.parametrize(
    "kind,ct", [("mean_shift", "mean"), ("variance_shift", "variance"), ("ar1_shift", "frequency")]
)
def test_matches_oracle_and_is_deterministic(kind, ct):
    ts = bounded(gen_series(kind, 5000, seed=4))
    cfg = CPDConfig(ct, seed=4)
    a, b = cpd(ts, cfg), cpd(ts, cfg)
    assert a.to_dict() == b.to_dict()
    tau, _ = cpd_plain(normalize(ts).values, a.diagnostics["m"], ct)
    assert a.tau_block == tau
    assert a.tau_index == a.diagnostics["m"] * a.tau_block


def test_depth_budget_is_enforced():
    ts = bounded(gen_series("ar1_shift", 2000, seed=0))
    with pytest.raises(DepthOverflowError):
        cpd(ts, CPDConfig("frequency", depth_budget=40))


def test_frequency_depth_for_a_million_points():
    ts = bounded(gen_series("ar1_shift", 1_000_000, seed=0))
    r = cpd(ts, CPDConfig("frequency"))
    assert r.diagnostics["padded_dim"] == 1024
    assert r.diagnostics["max_depth"] <= 65


def test_noise_knob_runs():
    ts = bounded(gen_series("mean_shift", 4000, seed=2))
    clean = cpd(ts, CPDConfig("mean", seed=2))
    noisy = cpd(ts, CPDConfig("mean", noise_stddev=1e-9, seed=2))
    assert noisy.confidence_ok and noisy.tau_index == clean.tau_index
    assert noisy.diagnostics["counters"] == clean.diagnostics["counters"]
