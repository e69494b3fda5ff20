"""Shared-parameter mixture of the candidate families.

The model places every component on the same population mean/variance
pair and mixes them with simplex weights.  Priors follow the reference
setup: independent gamma(shape 0.01, scale 100) on the mean and the
variance (each with prior mean 1 and prior variance 100) and a
symmetric Dirichlet on the weights.

A bijective "working" parametrization (log mean, log variance,
stick-breaking logits) maps the open interior of the parameter space to
an unconstrained vector, which is what the optimizer and the sampler
operate on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NoRootError
from .families import CommonParams, FamilyId, logpdf_common
from .numerics import log_gamma

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class MixtureSpec:
    """Component families plus prior hyperparameters.

    Weight concentrations below 1 are rejected: sharp weight hypotheses
    evaluate the prior on the simplex boundary, where such Dirichlet
    densities diverge.
    """

    components: tuple[FamilyId, ...]
    prior_mu: tuple[float, float] = (0.01, 100.0)
    prior_sigma2: tuple[float, float] = (0.01, 100.0)
    weight_concentration: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) < 2:
            raise DomainError("a mixture needs at least two components")
        if not all(isinstance(c, FamilyId) for c in comps):
            raise DomainError("components must be FamilyId values")
        conc = tuple(self.weight_concentration) or (1.0,) * len(comps)
        if len(conc) != len(comps):
            raise DomainError("one concentration per component required")
        if any((not math.isfinite(c)) or c < 1.0 for c in conc):
            raise DomainError("weight concentrations must be >= 1")
        object.__setattr__(self, "weight_concentration", conc)
        for name, (shape, scale) in (("prior_mu", self.prior_mu), ("prior_sigma2", self.prior_sigma2)):
            if shape <= 0.0 or scale <= 0.0:
                raise DomainError(f"{name} gamma prior requires positive shape and scale")

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def working_dim(self) -> int:
        return 2 + len(self.components) - 1

    def component_index(self, family: FamilyId) -> int:
        return self.components.index(family)

    def labels(self) -> list[str]:
        return [c.value for c in self.components]


@dataclass(frozen=True)
class MixtureState:
    """A full parameter point: common (mu, sigma2) plus simplex weights."""

    cp: CommonParams
    weights: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size < 2:
            raise DomainError("weights must be a vector of length >= 2")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise DomainError("weights must be nonnegative and finite")
        if abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {np.sum(w)}")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MixtureState)
            and self.cp == other.cp
            and np.array_equal(self.weights, other.weights)
        )


def component_logpdfs(spec: MixtureSpec, cp: CommonParams, data: np.ndarray) -> np.ndarray:
    """(m, n) matrix of per-component log densities at the common params.

    A component whose mean/variance inversion fails contributes -inf
    rows rather than raising; the mixture treats it as density zero.
    """
    data = np.asarray(data, dtype=float)
    out = np.empty((spec.n_components, data.size))
    for k, fam in enumerate(spec.components):
        try:
            out[k] = logpdf_common(fam, cp, data)
        except NoRootError:
            out[k] = _NEG_INF
    return out


def loglik(spec: MixtureSpec, state: MixtureState, data) -> float:
    """Mixture log likelihood, stabilized with log-sum-exp over components.

    Returns -inf (rather than raising) when every component has density
    zero at some observation.
    """
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        return 0.0
    if np.any(data <= 0.0) or not np.all(np.isfinite(data)):
        raise DomainError("data must be strictly positive and finite")
    lp = component_logpdfs(spec, state.cp, data)
    w = state.weights
    active = w > 0.0
    if not np.any(active):
        return _NEG_INF
    terms = lp[active] + np.log(w[active])[:, None]
    top = np.max(terms, axis=0)
    if not np.all(np.isfinite(top)):
        return _NEG_INF
    point = top + np.log(np.sum(np.exp(terms - top), axis=0))
    total = float(np.sum(point))
    return total if math.isfinite(total) else _NEG_INF


def _gamma_logpdf(x: float, shape: float, scale: float) -> float:
    return (shape - 1.0) * math.log(x) - x / scale - log_gamma(shape) - shape * math.log(scale)


def logprior(spec: MixtureSpec, state: MixtureState) -> float:
    """Joint log prior: gamma on mean and variance, Dirichlet on weights.

    With unit concentrations the Dirichlet term is a constant, so weight
    vectors on the simplex boundary stay finite.
    """
    total = _gamma_logpdf(state.cp.mu, *spec.prior_mu)
    total += _gamma_logpdf(state.cp.sigma2, *spec.prior_sigma2)
    conc = np.asarray(spec.weight_concentration)
    total += log_gamma(float(np.sum(conc))) - float(np.sum([log_gamma(c) for c in conc]))
    w = state.weights
    # 0 * log(0) reads as 0 here; concentrations below 1 never construct.
    mask = conc != 1.0
    if np.any(mask):
        if np.any(w[mask] <= 0.0):
            return _NEG_INF
        total += float(np.sum((conc[mask] - 1.0) * np.log(w[mask])))
    return total


def logposterior(spec: MixtureSpec, state: MixtureState, data) -> float:
    """Unnormalized log posterior: loglik + logprior."""
    lp = logprior(spec, state)
    if not math.isfinite(lp):
        return _NEG_INF
    ll = loglik(spec, state, data)
    return ll + lp if math.isfinite(ll) else _NEG_INF


# --- working parametrization -------------------------------------------------
#
# w = (log mu, log sigma2, z_0 .. z_{m-2}) with centered stick-breaking
# logits: z_i = logit(v_i) + log(m-1-i), where v_i is the fraction of the
# remaining stick taken by weight i.  Equal weights map to z = 0.


def _sticks_to_weights(z: np.ndarray) -> np.ndarray:
    m = z.size + 1
    w = np.empty(m)
    stick = 1.0
    for i in range(m - 1):
        v = 1.0 / (1.0 + math.exp(-(z[i] - math.log(m - 1.0 - i))))
        w[i] = stick * v
        stick *= 1.0 - v
    w[m - 1] = stick
    return w


def _weights_to_sticks(w: np.ndarray) -> np.ndarray:
    m = w.size
    z = np.empty(m - 1)
    stick = 1.0
    for i in range(m - 1):
        v = w[i] / stick
        if not 0.0 < v < 1.0:
            raise DomainError("weights on the simplex boundary have no working image")
        z[i] = math.log(v / (1.0 - v)) + math.log(m - 1.0 - i)
        stick *= 1.0 - v
    return z


def stick_log_jacobian(z: np.ndarray) -> float:
    """Log |d weights / d logits| of the stick-breaking map."""
    m = z.size + 1
    total = 0.0
    log_stick = 0.0
    for i in range(m - 1):
        t = z[i] - math.log(m - 1.0 - i)
        # log v + log(1-v) computed stably from the logit t
        log_v = -math.log1p(math.exp(-t)) if t > -35 else t
        log_1mv = -math.log1p(math.exp(t)) if t < 35 else -t
        total += log_v + log_1mv + log_stick
        log_stick += log_1mv
    return total


def to_working(spec: MixtureSpec, state: MixtureState) -> np.ndarray:
    """Map an interior state to the unconstrained working vector."""
    w = np.empty(spec.working_dim)
    w[0] = math.log(state.cp.mu)
    w[1] = math.log(state.cp.sigma2)
    w[2:] = _weights_to_sticks(state.weights)
    return w


def from_working(spec: MixtureSpec, w: np.ndarray) -> MixtureState:
    """Inverse of to_working."""
    w = np.asarray(w, dtype=float)
    if w.shape != (spec.working_dim,) or not np.all(np.isfinite(w)):
        raise DomainError(f"working point must be {spec.working_dim} finite reals")
    cp = CommonParams(math.exp(w[0]), math.exp(w[1]))
    return MixtureState(cp, _sticks_to_weights(w[2:]))


def working_log_jacobian(spec: MixtureSpec, w: np.ndarray) -> float:
    """Log volume change of from_working at w (for change of variables)."""
    w = np.asarray(w, dtype=float)
    return float(w[0] + w[1] + stick_log_jacobian(w[2:]))
