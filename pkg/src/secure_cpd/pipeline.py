"""End-to-end encrypted change-point detection.

normalize -> encode as a block matrix -> block statistic -> CUSUM scores ->
column-product argmax -> read the one-hot index.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .backend import DEFAULT_DEPTH_BUDGET, EvalContext, decode, encrypt
from .compare import SignApproxParams, resolution_gamma
from .cusum import cusum_scores
from .errors import DataError, DepthOverflowError, ParameterError
from .layout import BlockLayout, check_change_type, default_block_size
from .matrix import BlockMatrix
from .rank import argmax_fast, read_one_hot
from .summarize import block_mean, block_variance, turning_rates

log = logging.getLogger(__name__)

MIN_SERIES_LENGTH = 9


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    bounds: tuple | None = None
    name: str = "series"
    clamped: int = 0
    bounds_source: str = "user"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(v)):
            raise DataError(f"{self.name}: series contains NaN or infinite values")
        object.__setattr__(self, "values", v)
        if self.bounds is not None:
            lo, hi = (float(b) for b in self.bounds)
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ParameterError("bounds must be finite")
            if lo >= hi:
                raise ParameterError(f"lower bound {lo} must be below upper bound {hi}")
            object.__setattr__(self, "bounds", (lo, hi))

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class CPDConfig:
    change_type: str = "mean"
    block_size: int | None = None
    sign_params: SignApproxParams = field(default_factory=SignApproxParams)
    depth_budget: int = DEFAULT_DEPTH_BUDGET
    noise_stddev: float = 0.0
    seed: int = 0

    def __post_init__(self):
        check_change_type(self.change_type)
        if self.block_size is not None and self.block_size < 1:
            raise ParameterError("block size must be positive")

    def block_size_for(self, n: int) -> int:
        return self.block_size or default_block_size(n)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ChangePointResult:
    tau_block: int | None
    tau_index: int | None
    confidence_ok: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


PRIVACY_CAVEAT = (
    "no bounds given: normalizing with the data's own min/max, "
    "which depends on the private values"
)


def normalize(ts: TimeSeries) -> TimeSeries:
    """Affine map of the bounds onto [0, 1]; out-of-range values are clamped."""
    source = ts.bounds_source
    bounds = ts.bounds
    if bounds is None:
        warnings.warn(PRIVACY_CAVEAT, stacklevel=2)
        lo, hi = float(ts.values.min()), float(ts.values.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        bounds, source = (lo, hi), "data"
    lo, hi = bounds
    outside = int(np.count_nonzero((ts.values < lo) | (ts.values > hi)))
    if outside:
        warnings.warn(f"{outside} values outside bounds {bounds} were clamped", stacklevel=2)
    v = (np.clip(ts.values, lo, hi) - lo) / (hi - lo)
    return TimeSeries(v, (0.0, 1.0), ts.name, ts.clamped + outside, source)


def encode_matrix(ts: TimeSeries, m: int, ctx: EvalContext, change_type: str = "mean"):
    """(BlockMatrix, BlockLayout) for a normalized series."""
    layout = BlockLayout.build(len(ts), m, change_type)
    if layout.slot_count > ctx.slot_count:
        raise ParameterError(f"layout needs {layout.slot_count} slots, context has {ctx.slot_count}")
    X = BlockMatrix(encrypt(layout.to_matrix(ts.values).ravel(), ctx), layout.n_b, m, layout.dim)
    return X, layout


@lru_cache(maxsize=None)
def _gamma(params: SignApproxParams) -> float:
    return resolution_gamma(params)


def summarize(X: BlockMatrix, layout: BlockLayout, change_type: str, params: SignApproxParams) -> BlockMatrix:
    if change_type == "mean":
        return block_mean(X, layout.m, layout.m_last)
    if change_type == "variance":
        return block_variance(X, layout.m, layout.m_last)
    return turning_rates(X, layout.m, params, layout.m_last)


def cpd(ts: TimeSeries, cfg: CPDConfig = CPDConfig()) -> ChangePointResult:
    n = len(ts)
    if n < MIN_SERIES_LENGTH:
        raise ParameterError(f"need at least {MIN_SERIES_LENGTH} points, got {n}")
    norm = normalize(ts)
    m = cfg.block_size_for(n)
    layout = BlockLayout.build(n, m, cfg.change_type)
    ctx = EvalContext(layout.slot_count, cfg.depth_budget, cfg.noise_stddev, cfg.seed)
    X, _ = encode_matrix(norm, m, ctx, cfg.change_type)

    S = summarize(X, layout, cfg.change_type, cfg.sign_params)
    U = cusum_scores(S)
    H = argmax_fast(U, layout.n_b, cfg.sign_params)
    if ctx.max_depth > cfg.depth_budget:  # the backend raises first; belt and braces
        raise DepthOverflowError(f"depth {ctx.max_depth} exceeds budget {cfg.depth_budget}")
    reading = read_one_hot(H, layout.n_b)

    # emulator-only view of the scores, for diagnostics
    scores = decode(U)[: layout.n_b]
    top2 = np.sort(scores)[-2:] if layout.n_b > 1 else np.array([0.0, scores[0]])
    gamma = _gamma(cfg.sign_params)
    diagnostics = {
        "counters": ctx.counters.as_dict(),
        "max_depth": ctx.max_depth,
        "depth_budget": cfg.depth_budget,
        "n": n,
        "n_used": layout.n_used,
        "n_b": layout.n_b,
        "m": layout.m,
        "m_last": layout.m_last,
        "padded_dim": layout.dim,
        "slot_count": ctx.slot_count,
        "score_gap": float(top2[1] - top2[0]),
        "gamma": gamma,
        "gap_margin": float(top2[1] - top2[0] - gamma),
        "one_hot_top": reading.top,
        "one_hot_runner_up": reading.runner_up,
        "one_hot_clean": reading.clean,
        "clamped_values": norm.clamped,
        "bounds_source": norm.bounds_source,
    }
    if not reading.confidence_ok:
        log.info("no confident change point for %s", ts.name)
        return ChangePointResult(None, None, False, diagnostics)
    tau_block = reading.index + 1
    return ChangePointResult(tau_block, m * tau_block, True, diagnostics)
