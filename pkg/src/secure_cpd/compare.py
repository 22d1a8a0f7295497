"""Approximate comparison from composed odd degree-7 polynomials.

    f(x) = (35x - 35x^3 + 21x^5 - 5x^7) / 2^4
    g(x) = (4589x - 16577x^3 + 25614x^5 - 12860x^7) / 2^10

``g`` is applied ``d_g`` times then ``f`` ``d_f`` times; the composite pushes
every x in [-1, 1] towards sign(x).  cmp(x, y) = (sign(x - y) + 1) / 2.

Under encryption each stage is written as

    p(x) = c7 * x * (y - r) * ((y + b/2)^2 + k),   y = x^2

where r is the real root of the cubic q(y) = p(x)/x and (y^2 + b*y + k) its
quadratic cofactor.  That costs 5 products (4 ciphertext, 1 plaintext) and
4 levels per stage, against 4 levels and more products for a power basis.
Constant factors are free to move between the plaintext coefficients, which
is how an input scale and the final affine map (and an optional output mask)
are absorbed without extra levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .backend import CipherVector, PlainVector, add, mul, negate, sub
from .errors import ParameterError

# ascending power-basis coefficients of x, x^3, x^5, x^7
F_COEFFS = np.array([35.0, -35.0, 21.0, -5.0]) / 2**4
G_COEFFS = np.array([4589.0, -16577.0, 25614.0, -12860.0]) / 2**10

MULTS_PER_STAGE = 5
DEPTH_PER_STAGE = 4


@dataclass(frozen=True)
class SignApproxParams:
    d_f: int = 2
    d_g: int = 4

    def __post_init__(self):
        if int(self.d_f) < 1 or int(self.d_g) < 1:
            raise ParameterError(f"d_f and d_g must be >= 1, got ({self.d_f}, {self.d_g})")

    @property
    def stages(self) -> int:
        return self.d_f + self.d_g

    @property
    def mults(self) -> int:
        """nu: products spent by one call of :func:`cmp` or :func:`compose_sign`."""
        return MULTS_PER_STAGE * self.stages

    @property
    def depth(self) -> int:
        return DEPTH_PER_STAGE * self.stages


@dataclass(frozen=True)
class _Factored:
    c7: float
    r: float  # real root of the cubic in y
    half_b: float
    k: float  # (y + half_b)^2 + k is the quadratic cofactor


@lru_cache(maxsize=None)
def _factor(coeffs: tuple) -> _Factored:
    c1, c3, c5, c7 = coeffs
    roots = np.roots([c7, c5, c3, c1])
    real = roots[np.abs(roots.imag) < 1e-9].real
    if real.size == 0:
        raise ParameterError("cubic has no real root")
    r = float(real[0])
    # synthetic division of y^3 + a2 y^2 + a1 y + a0 by (y - r)
    a2 = c5 / c7
    b = a2 + r
    kappa = c3 / c7 + r * b
    return _Factored(c7, r, b / 2.0, kappa - b * b / 4.0)


F_FACTORED = _factor(tuple(F_COEFFS))
G_FACTORED = _factor(tuple(G_COEFFS))


# -- plaintext reference ---------------------------------------------------

def poly_eval(x, coeffs) -> np.ndarray:
    """Direct odd power-basis evaluation (no factoring)."""
    x = np.asarray(x, dtype=np.float64)
    return sum(c * x ** (2 * i + 1) for i, c in enumerate(coeffs))


def sign_approx(x, params: SignApproxParams = SignApproxParams()) -> np.ndarray:
    z = np.asarray(x, dtype=np.float64)
    for _ in range(params.d_g):
        z = poly_eval(z, G_COEFFS)
    for _ in range(params.d_f):
        z = poly_eval(z, F_COEFFS)
    return z


def cmp_plain(x, y, params: SignApproxParams = SignApproxParams()) -> np.ndarray:
    return (sign_approx(np.asarray(x, dtype=np.float64) - y, params) + 1.0) / 2.0


def resolution_gamma(
    params: SignApproxParams = SignApproxParams(), step: float = 1e-4, tol: float = 0.01
) -> float:
    """Smallest grid gap beyond which cmp is within ``tol`` of the exact step.

    cmp(x, y) only depends on d = x - y, and by oddness the error at -d equals
    the error at d, so a scan of d over [0, 1] covers all x, y in [0, 1].
    """
    d = np.arange(0.0, 1.0 + step / 2, step)
    err = np.abs(cmp_plain(d, 0.0, params) - (d > 0))
    bad = np.nonzero(err > tol)[0]
    if bad.size == 0:
        return 0.0
    if bad[-1] + 1 >= d.size:
        return float("inf")
    return float(d[bad[-1] + 1])


# -- encrypted evaluation --------------------------------------------------

def _stage(X: CipherVector, P: _Factored, scale: float = 1.0, out_mul=1.0, out_add=None) -> CipherVector:
    """out_add + out_mul * p(scale * X), spending exactly five products."""
    s2 = scale * scale
    y = X * X
    lin = y - P.r / s2
    v = y + P.half_b / s2
    w = v * v + P.k / (s2 * s2)
    t = lin * w
    coeff = P.c7 * scale**7
    if isinstance(out_mul, PlainVector):
        xs = mul(X, X.ctx.plain(coeff * out_mul.slots))
    else:
        xs = mul(X, coeff * out_mul)
    out = xs * t
    return out if out_add is None else add(out, out_add)


def _compose(Z: CipherVector, params: SignApproxParams, scale=1.0, out_mul=1.0, out_add=None) -> CipherVector:
    plan = [G_FACTORED] * params.d_g + [F_FACTORED] * params.d_f
    last = len(plan) - 1
    for i, P in enumerate(plan):
        Z = _stage(
            Z,
            P,
            scale=scale if i == 0 else 1.0,
            out_mul=out_mul if i == last else 1.0,
            out_add=out_add if i == last else None,
        )
    return Z


def compose_sign(X: CipherVector, params: SignApproxParams = SignApproxParams()) -> CipherVector:
    """Slot-wise f^d_f(g^d_g(x)); inputs are expected in [-1, 1]."""
    return _compose(X, params)


def _difference(X, Y) -> CipherVector:
    if isinstance(X, CipherVector):
        return sub(X, Y)
    if isinstance(Y, CipherVector):
        return add(negate(Y), X)
    raise TypeError("at least one cmp operand must be a ciphertext")


def cmp(X, Y, params: SignApproxParams = SignApproxParams(), scale: float = 1.0, out_mask=None) -> CipherVector:
    """Slot-wise ~[x > y], 0.5 on ties.

    ``scale`` multiplies x - y before the sign approximation (use it when the
    operands live outside [0, 1]).  ``out_mask`` is a public vector the result
    is multiplied by; both are folded into existing products.
    """
    Z = _difference(X, Y)
    if out_mask is None:
        return _compose(Z, params, scale=scale, out_mul=0.5, out_add=0.5)
    half = Z.ctx.plain(0.5 * out_mask.slots)
    return _compose(Z, params, scale=scale, out_mul=half, out_add=half)


def indicator(R: CipherVector, N: int, params: SignApproxParams = SignApproxParams(), out_mask=None) -> CipherVector:
    """~1 where R == N, ~0 where R <= N - 1, for R holding ranks in [0, N].

    Product of the two comparisons R > N - 1/2 and N + 1/2 > R, with
    differences scaled by 1/(N+1) into the comparator's domain.
    """
    if N < 1:
        raise ParameterError("N must be positive")
    s = 1.0 / (N + 1)
    above = cmp(R, N - 0.5, params, scale=s, out_mask=out_mask)
    below = cmp(N + 0.5, R, params, scale=s)
    return above * below
