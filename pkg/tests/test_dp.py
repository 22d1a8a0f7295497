import math

import numpy as np
import pytest

from secure_cpd.datagen import gen_series
from secure_cpd.dp import DPParams, clip, dp_cpd, epsilon_for_sigma, privatize, relative_error, sigma_dp
from secure_cpd.errors import ParameterError
from secure_cpd.oracle import cpd_plain


def test_clip():
    assert clip([1.5, -3, 0.2, -1.0], 1).tolist() == [1, -1, 0.2, -1]


def rdp_epsilon(sigma, delta, M):
    # independent statement of the Renyi bound minimized over the order a:
    # eps(a) = a D^2 / (2 sigma^2) + ln(1/delta) / (a - 1)
    D = 2 * M
    a = np.linspace(1.0001, 1e4, 2_000_001)
    return float(np.min(a * D * D / (2 * sigma**2) + math.log(1 / delta) / (a - 1)))


@pytest.mark.parametrize("eps,delta,M", [(1, 1e-6, 1), (0.5, 1e-8, 2), (25, 1e-8, 1)])
def test_sigma_round_trip(eps, delta, M):
    s = sigma_dp(eps, delta, M)
    assert epsilon_for_sigma(s, delta, M) == pytest.approx(eps, abs=1e-9)
    assert rdp_epsilon(s, delta, M) == pytest.approx(eps, rel=1e-4)


def test_sigma_linear_in_M_and_monotone_in_eps():
    assert sigma_dp(1, 1e-6, 2) == pytest.approx(2 * sigma_dp(1, 1e-6, 1))
    grid = np.linspace(0.1, 100, 500)
    s = [sigma_dp(e, 1e-6, 1) for e in grid]
    assert np.all(np.diff(s) < 0)


def test_parameter_validation():
    for args in ((0, 0.1, 1), (1, 0, 1), (1, 1, 1), (1, 0.1, 0)):
        with pytest.raises(ParameterError):
            sigma_dp(*args)
    with pytest.raises(ParameterError):
        DPParams(-1)


def test_relative_error():
    assert relative_error(20000, 20000) == 0.0
    assert relative_error(46360, 46500) == pytest.approx(0.00301, abs=1e-5)
    assert relative_error(200, 100) == 1.0
    with pytest.raises(ParameterError):
        relative_error(5, 0)


def test_zero_noise_is_plain_cpd():
    ts = gen_series("mean_shift", 4000, seed=1)
    r = dp_cpd(ts, 50, "mean", DPParams(1.0), seed=1, sigma=0.0)
    tau, _ = cpd_plain(np.clip(ts.values, -1, 1), 50, "mean")
    assert r.tau_block == tau


def test_seeded():
    ts = gen_series("ar1_shift", 4000, seed=1)
    a = dp_cpd(ts, None, "frequency", DPParams(5.0), seed=3)
    b = dp_cpd(ts, None, "frequency", DPParams(5.0), seed=3)
    assert a.to_dict() == b.to_dict()
    x1, s = privatize(ts.values, DPParams(5.0), seed=3)
    x2, _ = privatize(ts.values, DPParams(5.0), seed=4)
    assert not np.array_equal(x1, x2)
    assert s == pytest.approx(sigma_dp(5.0, 1 / 4000**2, 1.0))


def test_default_delta():
    assert DPParams(1.0).delta_for(100) == 1e-4
