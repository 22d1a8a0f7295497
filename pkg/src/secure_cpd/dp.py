"""Local differential privacy baseline: clip, add Gaussian noise, run plaintext CPD.

Calibration for one release of a clipped record with L2 sensitivity 2M:

    sigma = sqrt(2) * M / eps * (sqrt(L) + sqrt(L + eps)),   L = ln(1/delta)

which inverts the Renyi-to-approximate-DP bound

    eps = D^2 / (2 sigma^2) + (D / sigma) * sqrt(2 L),   D = 2M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .layout import BlockLayout, default_block_size
from .oracle import cpd_plain
from .pipeline import ChangePointResult, TimeSeries

NOISE_BOUND_SIGMAS = 6.0


@dataclass(frozen=True)
class DPParams:
    epsilon: float
    delta: float | None = None  # None means 1/n^2
    clip_M: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ParameterError(f"delta must be in (0, 1), got {self.delta}")
        if not self.clip_M > 0:
            raise ParameterError(f"clip bound must be positive, got {self.clip_M}")

    def delta_for(self, n: int) -> float:
        return self.delta if self.delta is not None else 1.0 / (n * n)


def clip(ts, M: float) -> np.ndarray:
    if not M > 0:
        raise ParameterError("clip bound must be positive")
    return np.clip(np.asarray(ts, dtype=np.float64), -M, M)


def sigma_dp(eps: float, delta: float, M: float = 1.0) -> float:
    if not eps > 0:
        raise ParameterError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ParameterError("delta must be in (0, 1)")
    if not M > 0:
        raise ParameterError("M must be positive")
    L = math.log(1.0 / delta)
    return math.sqrt(2.0) * M / eps * (math.sqrt(L) + math.sqrt(L + eps))


def epsilon_for_sigma(sigma: float, delta: float, M: float = 1.0) -> float:
    """Privacy level reached by noise ``sigma`` on records clipped to [-M, M]."""
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    D = 2.0 * M
    L = math.log(1.0 / delta)
    return D * D / (2.0 * sigma * sigma) + D / sigma * math.sqrt(2.0 * L)


def relative_error(tau_hat, tau: int) -> float:
    """|tau_hat - tau| / tau.  A missing estimate counts as tau_hat = 0."""
    if tau == 0:
        raise ParameterError("true change point must be non-zero")
    return abs((0 if tau_hat is None else tau_hat) - tau) / abs(tau)


def privatize(values, dp: DPParams, seed: int = 0, sigma: float | None = None):
    """(noisy series, sigma) under the local mechanism."""
    x = clip(values, dp.clip_M)
    if sigma is None:
        sigma = sigma_dp(dp.epsilon, dp.delta_for(x.size), dp.clip_M)
    rng = np.random.default_rng(seed)
    return x + rng.normal(0.0, sigma, x.size), sigma


def dp_cpd(
    ts,
    m: int | None,
    change_type: str,
    dp: DPParams,
    seed: int = 0,
    sigma: float | None = None,
) -> ChangePointResult:
    """Plaintext CPD on the privatized series.

    ``sigma`` overrides the calibrated noise level (0 reproduces the
    noiseless detector).  After noising, values are rescaled with the public
    bounds [-M - 6 sigma, M + 6 sigma].
    """
    values = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=np.float64)
    n = values.size
    m = m or default_block_size(n)
    noisy, sigma = privatize(values, dp, seed, sigma)
    half = dp.clip_M + NOISE_BOUND_SIGMAS * sigma
    normed = (np.clip(noisy, -half, half) + half) / (2 * half)
    tau_block, trace = cpd_plain(normed, m, change_type)
    layout = BlockLayout.build(n, m, change_type)
    diagnostics = {
        "sigma": sigma,
        "epsilon": dp.epsilon,
        "delta": dp.delta_for(n),
        "clip_M": dp.clip_M,
        "n_b": layout.n_b,
        "m": m,
        "seed": seed,
    }
    if tau_block is None:
        return ChangePointResult(None, None, False, diagnostics)
    return ChangePointResult(tau_block, m * tau_block, True, diagnostics)
