"""The three candidate families: densities, moment maps, and MLE fits.

Each family is available in its native parametrization and in a shared
mean/variance parametrization.  The mean/variance form is what lets the
mixture machinery treat all components as views of one population.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, DomainError
from .numerics import (
    RootBracket,
    digamma,
    log_gamma,
    sample_gamma,
    sample_lognormal,
    sample_weibull,
    solve_scalar_root,
)

_LOG_2PI = math.log(2.0 * math.pi)

# Shape search interval for the Weibull mean/variance inversion.  The
# matching coefficient of variation spans roughly [1.3e-3, 1e300], far
# beyond anything a finite dataset produces.
WEIBULL_SHAPE_BRACKET = RootBracket(1e-3, 1e3)


class FamilyId(enum.Enum):
    """Tags for the candidate families."""

    LOGNORMAL = "lognormal"
    GAMMA = "gamma"
    WEIBULL = "weibull"

    @property
    def short(self) -> str:
        return {"lognormal": "L", "gamma": "G", "weibull": "W"}[self.value]


@dataclass(frozen=True)
class CommonParams:
    """Population mean and variance, shared by every family."""

    mu: float
    sigma2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise DomainError(f"mean must be positive and finite, got {self.mu}")
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0.0):
            raise DomainError(f"variance must be positive and finite, got {self.sigma2}")


@dataclass(frozen=True)
class LognormalParams:
    """Log-scale location alpha1 and log-scale variance alpha2."""

    alpha1: float
    alpha2: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha1):
            raise DomainError(f"alpha1 must be finite, got {self.alpha1}")
        if not (math.isfinite(self.alpha2) and self.alpha2 > 0.0):
            raise DomainError(f"alpha2 must be positive, got {self.alpha2}")


@dataclass(frozen=True)
class GammaParams:
    """Scale gamma1 and shape gamma2."""

    gamma1: float
    gamma2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma1) and self.gamma1 > 0.0):
            raise DomainError(f"gamma1 must be positive, got {self.gamma1}")
        if not (math.isfinite(self.gamma2) and self.gamma2 > 0.0):
            raise DomainError(f"gamma2 must be positive, got {self.gamma2}")


@dataclass(frozen=True)
class WeibullParams:
    """Scale beta1 and shape beta2."""

    beta1: float
    beta2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta1) and self.beta1 > 0.0):
            raise DomainError(f"beta1 must be positive, got {self.beta1}")
        if not (math.isfinite(self.beta2) and self.beta2 > 0.0):
            raise DomainError(f"beta2 must be positive, got {self.beta2}")


FamilyParams = LognormalParams | GammaParams | WeibullParams

_PARAM_TYPES = {
    FamilyId.LOGNORMAL: LognormalParams,
    FamilyId.GAMMA: GammaParams,
    FamilyId.WEIBULL: WeibullParams,
}


def make_params(family: FamilyId, **kwargs) -> FamilyParams:
    """Construct the params dataclass matching the family tag."""
    return _PARAM_TYPES[family](**kwargs)


def sample(family: FamilyId, params: FamilyParams, rng: np.random.Generator, size=None):
    """Seeded draws from the family at native params."""
    if not isinstance(params, _PARAM_TYPES[family]):
        raise DomainError(f"params {type(params).__name__} do not match family {family.value}")
    if family is FamilyId.LOGNORMAL:
        return sample_lognormal(params.alpha1, params.alpha2, rng, size)
    if family is FamilyId.GAMMA:
        return sample_gamma(params.gamma1, params.gamma2, rng, size)
    return sample_weibull(params.beta1, params.beta2, rng, size)


def _check_positive_data(y, op: str) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.size == 0:
        raise DomainError(f"{op} requires nonempty data")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{op} requires strictly positive finite values")
    return arr


def logpdf_native(family: FamilyId, params: FamilyParams, y):
    """Log density of `family` at y (> 0), native parametrization.

    Accepts a scalar or an array; returns the same shape.
    """
    if not isinstance(params, _PARAM_TYPES[family]):
        raise DomainError(f"params {type(params).__name__} do not match family {family.value}")
    arr = _check_positive_data(y, "logpdf_native")
    log_y = np.log(arr)
    if family is FamilyId.LOGNORMAL:
        a1, a2 = params.alpha1, params.alpha2
        out = -log_y - 0.5 * math.log(a2) - 0.5 * _LOG_2PI - (log_y - a1) ** 2 / (2.0 * a2)
    elif family is FamilyId.GAMMA:
        g1, g2 = params.gamma1, params.gamma2
        out = -log_gamma(g2) - g2 * math.log(g1) + (g2 - 1.0) * log_y - arr / g1
    else:
        b1, b2 = params.beta1, params.beta2
        log_b1 = math.log(b1)
        out = (
            math.log(b2)
            - b2 * log_b1
            + (b2 - 1.0) * log_y
            - np.exp(b2 * (log_y - log_b1))
        )
    return float(out) if np.isscalar(y) else out


def family_moments(family: FamilyId, params: FamilyParams) -> tuple[float, float]:
    """Analytic (mean, variance) of the family at native params."""
    if family is FamilyId.LOGNORMAL:
        a1, a2 = params.alpha1, params.alpha2
        mean = math.exp(a1 + 0.5 * a2)
        var = math.expm1(a2) * math.exp(2.0 * a1 + a2)
    elif family is FamilyId.GAMMA:
        mean = params.gamma1 * params.gamma2
        var = params.gamma2 * params.gamma1**2
    else:
        b1, b2 = params.beta1, params.beta2
        g1 = math.exp(log_gamma(1.0 + 1.0 / b2))
        g2 = math.exp(log_gamma(1.0 + 2.0 / b2))
        mean = b1 * g1
        var = b1 * b1 * (g2 - g1 * g1)
    return mean, var


def weibull_shape_from_cv2(cv2: float, x0: float | None = None) -> float:
    """Shape beta2 whose squared coefficient of variation equals cv2.

    Solves 2 ln G(1+1/b) - ln G(1+2/b) + ln(1+cv2) = 0 with a
    derivative-based safeguarded solve inside WEIBULL_SHAPE_BRACKET.
    """
    if not (math.isfinite(cv2) and cv2 > 0.0):
        raise DomainError(f"cv^2 must be positive, got {cv2}")
    log_term = math.log1p(cv2)

    def resid(b: float) -> float:
        return 2.0 * math.lgamma(1.0 + 1.0 / b) - math.lgamma(1.0 + 2.0 / b) + log_term

    def dresid(b: float) -> float:
        return (2.0 / (b * b)) * (digamma(1.0 + 2.0 / b) - digamma(1.0 + 1.0 / b))

    if x0 is None:
        # cv ~ b^-1 * pi/sqrt(6) for large b; the classic power-law start
        # works across the whole practical range.
        x0 = cv2 ** (-0.543)
        x0 = min(max(x0, WEIBULL_SHAPE_BRACKET.lo * 1.01), WEIBULL_SHAPE_BRACKET.hi * 0.99)
    return solve_scalar_root(resid, WEIBULL_SHAPE_BRACKET, tol=1e-13, df=dresid, x0=x0)


def from_common(family: FamilyId, cp: CommonParams) -> FamilyParams:
    """Native params whose mean and variance equal (cp.mu, cp.sigma2).

    Raises NoRootError if the Weibull shape equation has no solution in
    the search bracket (coefficient of variation out of range).
    """
    mu, s2 = cp.mu, cp.sigma2
    cv2 = s2 / (mu * mu)
    if family is FamilyId.LOGNORMAL:
        alpha2 = math.log1p(cv2)
        alpha1 = math.log(mu) - 0.5 * alpha2
        return LognormalParams(alpha1, alpha2)
    if family is FamilyId.GAMMA:
        return GammaParams(gamma1=s2 / mu, gamma2=mu * mu / s2)
    beta2 = weibull_shape_from_cv2(cv2)
    beta1 = mu * math.exp(-log_gamma(1.0 + 1.0 / beta2))
    return WeibullParams(beta1, beta2)


def logpdf_common(family: FamilyId, cp: CommonParams, y):
    """Log density at y for the family matched to mean/variance cp."""
    return logpdf_native(family, from_common(family, cp), y)


def loglik(family: FamilyId, params: FamilyParams, data) -> float:
    """Summed log likelihood of the data under native params."""
    return float(np.sum(logpdf_native(family, params, np.asarray(data, dtype=float))))


def mle_lognormal(data) -> LognormalParams:
    """Lognormal maximum likelihood fit.

    alpha1 is the mean of the logs and alpha2 the mean squared deviation
    of the logs (divisor n, matching likelihood maximization).  Zero
    spread in the logs is rejected: every downstream statistic divides
    by a variance.
    """
    arr = _check_positive_data(data, "mle_lognormal")
    if arr.size < 2:
        raise DomainError("mle_lognormal requires n >= 2")
    logs = np.log(arr)
    a1 = float(np.mean(logs))
    a2 = float(np.mean((logs - a1) ** 2))
    if a2 == 0.0:
        raise DegenerateDataError(
            f"all observations equal; fit degenerates to alpha1={a1}, alpha2=0"
        )
    return LognormalParams(a1, a2)


def _weibull_profile_terms(log_y: np.ndarray, b: float) -> tuple[float, float, float]:
    """Weighted mean/variance of log y under weights y^b, plus log mean of y^b."""
    t = b * log_y
    m = float(np.max(t))
    w = np.exp(t - m)
    sw = float(np.sum(w))
    mean_log = float(np.sum(w * log_y) / sw)
    var_log = float(np.sum(w * (log_y - mean_log) ** 2) / sw)
    log_mean_pow = m + math.log(sw / log_y.size)
    return mean_log, var_log, log_mean_pow


def mle_weibull(data) -> WeibullParams:
    """Weibull maximum likelihood fit via the profile shape equation.

    The shape solves  sum(y^b ln y)/sum(y^b) - 1/b - mean(ln y) = 0,
    which is strictly increasing in b; the scale then follows in closed
    form.  Degenerate (all-equal) data is rejected.
    """
    arr = _check_positive_data(data, "mle_weibull")
    if arr.size < 2:
        raise DomainError("mle_weibull requires n >= 2")
    log_y = np.log(arr)
    sd_log = float(np.std(log_y))
    if sd_log == 0.0:
        raise DegenerateDataError("all observations equal; Weibull shape diverges")
    mean_log = float(np.mean(log_y))

    def profile(b: float) -> float:
        w_mean, _, _ = _weibull_profile_terms(log_y, b)
        return w_mean - 1.0 / b - mean_log

    def dprofile(b: float) -> float:
        _, w_var, _ = _weibull_profile_terms(log_y, b)
        return w_var + 1.0 / (b * b)

    # Moment-style start: sd of log y ~ (pi/sqrt(6)) / b.
    x0 = min(max(1.2825498301618641 / sd_log, 1.01e-3), 0.99e3)
    b2 = solve_scalar_root(profile, WEIBULL_SHAPE_BRACKET, tol=1e-12, df=dprofile, x0=x0)
    _, _, log_mean_pow = _weibull_profile_terms(log_y, b2)
    b1 = math.exp(log_mean_pow / b2)
    return WeibullParams(b1, b2)
