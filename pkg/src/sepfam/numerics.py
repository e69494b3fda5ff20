"""Scalar special functions, safeguarded root finding, and seeded sampling.

Everything here is pure and reentrant; stochastic functions take a
caller-owned ``numpy.random.Generator`` so concurrent use only requires
independent generator streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NoRootError

_SQRT2 = math.sqrt(2.0)
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RootBracket:
    """Search interval for scalar root solving."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError("bracket endpoints must be finite")
        if not self.lo < self.hi:
            raise DomainError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0.

    Backed by the C library's lgamma, which is accurate to a few ulp
    across the supported range.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma requires finite x > 0, got {x}")
    return math.lgamma(x)


def digamma(x: float) -> float:
    """Logarithmic derivative of the gamma function for x > 0.

    Recurrence shifts the argument above 6, then an asymptotic series.
    Absolute error is below 1e-12 on (0, inf); used for Newton steps on
    shape equations, where that is ample.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"digamma requires finite x > 0, got {x}")
    result = 0.0
    while x < 6.0:
        result -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    # Stirling-type expansion of psi(x) for large x.
    result += (
        math.log(x)
        - 0.5 * inv
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
    )
    return result


def std_normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function."""
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"std_normal_cdf requires finite z, got {z}")
    return 0.5 * math.erfc(-z / _SQRT2)


def regularized_gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.

    Power series for x < a + 1, Lentz continued fraction otherwise;
    both converge to near machine precision.
    """
    a = float(a)
    x = float(x)
    if not (math.isfinite(a) and a > 0.0):
        raise DomainError(f"regularized_gamma_p requires a > 0, got {a}")
    if not (math.isfinite(x) and x >= 0.0):
        raise DomainError(f"regularized_gamma_p requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        # Series: P(a,x) = x^a e^-x / Gamma(a) * sum_k x^k / (a)_{k+1}
        term = 1.0 / a
        total = term
        denom = a
        for _ in range(500):
            denom += 1.0
            term *= x / denom
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return min(1.0, math.exp(log_prefactor) * total)
    # Continued fraction for Q(a,x), modified Lentz.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    q = math.exp(log_prefactor) * h
    return max(0.0, 1.0 - q)


def chi2_cdf(x: float, df: float) -> float:
    """Chi-square CDF with df degrees of freedom."""
    df = float(df)
    x = float(x)
    if not (math.isfinite(df) and df > 0.0):
        raise DomainError(f"chi2_cdf requires df > 0, got {df}")
    if not (math.isfinite(x) and x >= 0.0):
        raise DomainError(f"chi2_cdf requires x >= 0, got {x}")
    return regularized_gamma_p(0.5 * df, 0.5 * x)


def _chi2_logpdf(x: float, df: float) -> float:
    half = 0.5 * df
    return (half - 1.0) * math.log(x) - 0.5 * x - half * math.log(2.0) - math.lgamma(half)


def chi2_quantile(q: float, df: float) -> float:
    """Inverse chi-square CDF, Newton on the CDF with a bisection safeguard."""
    q = float(q)
    df = float(df)
    if not (math.isfinite(df) and df > 0.0):
        raise DomainError(f"chi2_quantile requires df > 0, got {df}")
    if not (math.isfinite(q) and 0.0 < q < 1.0):
        raise DomainError(f"chi2_quantile requires q in (0,1), got {q}")

    # Wilson-Hilferty starting point, clipped away from zero.
    z = _std_normal_quantile(q)
    wh = df * (1.0 - 2.0 / (9.0 * df) + z * math.sqrt(2.0 / (9.0 * df))) ** 3
    x = wh if wh > 0.0 else 0.5 * df

    lo, hi = 0.0, x
    while chi2_cdf(hi, df) < q:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            raise NoRootError("chi2_quantile bracket expansion overflow")

    for _ in range(200):
        fx = chi2_cdf(x, df) - q
        if fx > 0.0:
            hi = x
        else:
            lo = x
        if abs(fx) < 1e-14:
            break
        pdf = math.exp(_chi2_logpdf(x, df)) if x > 0.0 else 0.0
        if pdf > 0.0:
            step = fx / pdf
            x_new = x - step
        else:
            x_new = math.nan
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) < 1e-15 * (1.0 + x):
            x = x_new
            break
        x = x_new
    return x


def _std_normal_quantile(q: float) -> float:
    """Solve std_normal_cdf(z) = q, bisection-safeguarded Newton."""
    lo, hi = -40.0, 40.0
    z = 0.0
    for _ in range(100):
        f = std_normal_cdf(z) - q
        if f > 0.0:
            hi = z
        else:
            lo = z
        if abs(f) < 1e-16:
            break
        pdf = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        z_new = z - f / pdf if pdf > 1e-300 else math.nan
        if not (lo < z_new < hi):
            z_new = 0.5 * (lo + hi)
        if abs(z_new - z) < 1e-15 * (1.0 + abs(z)):
            z = z_new
            break
        z = z_new
    return z


def solve_scalar_root(
    f: Callable[[float], float],
    bracket: RootBracket,
    tol: float = 1e-12,
    df: Callable[[float], float] | None = None,
    x0: float | None = None,
    max_iter: int = 200,
) -> float:
    """Find x in the bracket with |f(x)| <= tol.

    Newton steps (or secant steps when no derivative is supplied) are
    safeguarded by bisection whenever a sign change is available, so the
    iterate never leaves the bracket.  Without a sign change the solve
    only succeeds if the (quasi-)Newton iteration converges monotonically
    inside the bracket; otherwise NoRootError is raised.
    """
    lo, hi = bracket.lo, bracket.hi
    flo = f(lo)
    fhi = f(hi)
    if abs(flo) <= tol:
        return lo
    if abs(fhi) <= tol:
        return hi
    bracketed = (flo < 0.0) != (fhi < 0.0)

    if x0 is not None and lo < x0 < hi:
        x = float(x0)
    else:
        x = 0.5 * (lo + hi)
    fx = f(x)
    x_prev, f_prev = lo, flo

    for _ in range(max_iter):
        if abs(fx) <= tol:
            return x
        if bracketed:
            if (fx < 0.0) == (flo < 0.0):
                lo, flo = x, fx
            else:
                hi, fhi = x, fx
        if df is not None:
            slope = df(x)
        else:
            slope = (fx - f_prev) / (x - x_prev) if x != x_prev else 0.0
        x_prev, f_prev = x, fx
        x_new = x - fx / slope if slope != 0.0 and math.isfinite(slope) else math.nan
        if bracketed:
            if not (lo < x_new < hi) or not math.isfinite(x_new):
                x_new = 0.5 * (lo + hi)
        else:
            if not (bracket.lo <= x_new <= bracket.hi) or not math.isfinite(x_new):
                raise NoRootError(
                    "no sign change over bracket and Newton iteration left it"
                )
        if x_new == x:
            break
        x = x_new
        fx = f(x)

    if abs(fx) <= tol:
        return x
    if bracketed and hi - lo <= 4.0 * _EPS * (1.0 + abs(lo)):
        # Root pinched to machine precision; |f| may not reach tol for
        # steep objectives, return the midpoint of the final bracket.
        return 0.5 * (lo + hi)
    raise NoRootError(f"root solve did not reach |f| <= {tol}")


def sample_lognormal(alpha1: float, alpha2: float, rng: np.random.Generator, size=None):
    """Draws with log-scale location alpha1 and log-scale variance alpha2."""
    if not (math.isfinite(alpha1) and math.isfinite(alpha2) and alpha2 > 0.0):
        raise DomainError(f"invalid lognormal params ({alpha1}, {alpha2})")
    return rng.lognormal(mean=alpha1, sigma=math.sqrt(alpha2), size=size)


def sample_gamma(gamma1: float, gamma2: float, rng: np.random.Generator, size=None):
    """Draws with scale gamma1 and shape gamma2."""
    if not (gamma1 > 0.0 and gamma2 > 0.0 and math.isfinite(gamma1) and math.isfinite(gamma2)):
        raise DomainError(f"invalid gamma params ({gamma1}, {gamma2})")
    return rng.gamma(shape=gamma2, scale=gamma1, size=size)


def sample_weibull(beta1: float, beta2: float, rng: np.random.Generator, size=None):
    """Draws with scale beta1 and shape beta2."""
    if not (beta1 > 0.0 and beta2 > 0.0 and math.isfinite(beta1) and math.isfinite(beta2)):
        raise DomainError(f"invalid weibull params ({beta1}, {beta2})")
    return beta1 * rng.weibull(beta2, size=size)
