"""Change-point detection on an emulated SIMD-encrypted time series."""

__version__ = "0.1.0"

from .backend import CipherVector, EvalContext, PlainVector, add, decode, encrypt, mul, rotate
from .compare import SignApproxParams, cmp, compose_sign, indicator
from .dp import DPParams, dp_cpd, relative_error, sigma_dp
from .errors import (
    CapacityError,
    ConfidenceError,
    ContextMismatchError,
    DataError,
    DepthOverflowError,
    ParameterError,
    SecureCPDError,
)
from .oracle import cpd_plain
from .pipeline import ChangePointResult, CPDConfig, TimeSeries, cpd, normalize

__all__ = [
    "CipherVector", "EvalContext", "PlainVector", "add", "decode", "encrypt", "mul", "rotate",
    "SignApproxParams", "cmp", "compose_sign", "indicator",
    "DPParams", "dp_cpd", "relative_error", "sigma_dp",
    "CapacityError", "ConfidenceError", "ContextMismatchError", "DataError",
    "DepthOverflowError", "ParameterError", "SecureCPDError",
    "cpd_plain", "ChangePointResult", "CPDConfig", "TimeSeries", "cpd", "normalize",
]
