"""Pure-NumPy chain kernels; reference semantics for sepfam._core.

Both backends expose the same two entry points:

``eval_logpost(pack, w)``
    Unnormalized log posterior of a working point, returned both in model
    coordinates (mean/variance/weights) and in working coordinates
    (including the change-of-variables term the sampler needs).

``run_chain(pack, w0, normals, uniforms, burn_in, adapt_start, init_scale)``
    Adaptive random-walk Metropolis over the working space, driven by
    pre-drawn standard normal and uniform variates so that results are
    identical for any backend given the same seed.

The compiled backend is an order of magnitude faster; this module keeps
the package fully functional without a compiler and doubles as the
readable specification of the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_NEG_INF = float("-inf")

LOGNORMAL_CODE = 0
GAMMA_CODE = 1
WEIBULL_CODE = 2

_SHAPE_LO = 1e-3
_SHAPE_HI = 1e3


@dataclass(frozen=True)
class ModelPack:
    """Flat, backend-agnostic description of one (sub)model.

    ``weight_logprior_const`` carries every weight-prior term that does
    not depend on the active weights (the Dirichlet normalizer of the
    full model plus boundary terms of removed components), so constrained
    submodels stay on the same posterior-density scale as the full model.
    """

    y: np.ndarray
    log_y: np.ndarray
    fam_codes: np.ndarray  # int32, one of the *_CODE values per component
    conc: np.ndarray  # concentrations of the active components
    weight_logprior_const: float
    prior_mu_shape: float
    prior_mu_scale: float
    prior_s2_shape: float
    prior_s2_scale: float

    @property
    def n_components(self) -> int:
        return int(self.fam_codes.size)

    @property
    def dim(self) -> int:
        return 2 + self.n_components - 1


def _digamma(x: float) -> float:
    result = 0.0
    while x < 6.0:
        result -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    return result + (
        math.log(x) - 0.5 * inv - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
    )


def weibull_shape(cv2: float, init: float = 0.0) -> float:
    """Shape matching squared coefficient of variation cv2; 0 on failure.

    Safeguarded Newton on 2 lnG(1+1/b) - lnG(1+2/b) + ln(1+cv2) inside
    [1e-3, 1e3]; the residual is strictly increasing in b.
    """
    log_term = math.log1p(cv2)
    lo, hi = _SHAPE_LO, _SHAPE_HI

    def resid(b: float) -> float:
        return 2.0 * math.lgamma(1.0 + 1.0 / b) - math.lgamma(1.0 + 2.0 / b) + log_term

    f_hi = resid(hi)
    if f_hi <= 0.0:
        return 0.0  # root above bracket (cv too small)
    f_lo = resid(lo)
    if f_lo >= 0.0:
        return 0.0  # root below bracket (cv astronomically large)

    b = init if lo < init < hi else min(max(cv2**-0.543, lo * 1.01), hi * 0.99)
    fb = resid(b)
    for _ in range(100):
        if abs(fb) <= 1e-13:
            return b
        if fb < 0.0:
            lo = b
        else:
            hi = b
        slope = (2.0 / (b * b)) * (_digamma(1.0 + 2.0 / b) - _digamma(1.0 + 1.0 / b))
        b_new = b - fb / slope if slope > 0.0 else 0.0
        if not lo < b_new < hi:
            b_new = 0.5 * (lo + hi)
        if b_new == b:
            return b
        b = b_new
        fb = resid(b)
    return b if abs(fb) <= 1e-9 else 0.0


def _sticks_to_log_weights(z: np.ndarray) -> tuple[np.ndarray, float]:
    """Log weights and stick-breaking log Jacobian from centered logits."""
    m = z.size + 1
    log_w = np.empty(m)
    log_jac = 0.0
    log_stick = 0.0
    for i in range(m - 1):
        t = z[i] - math.log(m - 1.0 - i)
        log_v = -math.log1p(math.exp(-t)) if t > -35 else t
        log_1mv = -math.log1p(math.exp(t)) if t < 35 else -t
        log_w[i] = log_stick + log_v
        log_jac += log_v + log_1mv + log_stick
        log_stick += log_1mv
    log_w[m - 1] = log_stick
    return log_w, log_jac


def eval_logpost(pack: ModelPack, w, shape_init: float = 0.0):
    """(log posterior in model coords, log density in working coords)."""
    w = np.asarray(w, dtype=float)
    log_mu, log_s2 = float(w[0]), float(w[1])
    if not np.all(np.isfinite(w)):
        return _NEG_INF, _NEG_INF
    mu = math.exp(log_mu)
    s2 = math.exp(log_s2)
    if not (0.0 < mu < math.inf and 0.0 < s2 < math.inf):
        return _NEG_INF, _NEG_INF
    log_weights, stick_jac = _sticks_to_log_weights(w[2:])

    cv2 = s2 / (mu * mu)
    n = pack.y.size
    m = pack.n_components
    if n > 0:
        comp = np.empty((m, n))
        for k in range(m):
            code = pack.fam_codes[k]
            if code == LOGNORMAL_CODE:
                a2 = math.log1p(cv2)
                a1 = log_mu - 0.5 * a2
                comp[k] = (
                    -pack.log_y
                    - 0.5 * math.log(a2)
                    - 0.5 * math.log(2.0 * math.pi)
                    - (pack.log_y - a1) ** 2 / (2.0 * a2)
                )
            elif code == GAMMA_CODE:
                g2 = 1.0 / cv2
                log_g1 = math.log(s2) - log_mu
                comp[k] = (
                    -math.lgamma(g2)
                    - g2 * log_g1
                    + (g2 - 1.0) * pack.log_y
                    - pack.y * math.exp(-log_g1)
                )
            else:
                b2 = weibull_shape(cv2, shape_init)
                if b2 <= 0.0:
                    return _NEG_INF, _NEG_INF
                log_b1 = log_mu - math.lgamma(1.0 + 1.0 / b2)
                comp[k] = (
                    math.log(b2)
                    - b2 * log_b1
                    + (b2 - 1.0) * pack.log_y
                    - np.exp(b2 * (pack.log_y - log_b1))
                )
        if m == 1:
            ll = float(np.sum(comp[0]))
        else:
            terms = comp + log_weights[:, None]
            top = np.max(terms, axis=0)
            if not np.all(np.isfinite(top)):
                return _NEG_INF, _NEG_INF
            ll = float(np.sum(top + np.log(np.sum(np.exp(terms - top), axis=0))))
        if not math.isfinite(ll):
            return _NEG_INF, _NEG_INF
    else:
        ll = 0.0

    lp = (
        (pack.prior_mu_shape - 1.0) * log_mu
        - mu / pack.prior_mu_scale
        - math.lgamma(pack.prior_mu_shape)
        - pack.prior_mu_shape * math.log(pack.prior_mu_scale)
    )
    lp += (
        (pack.prior_s2_shape - 1.0) * log_s2
        - s2 / pack.prior_s2_scale
        - math.lgamma(pack.prior_s2_shape)
        - pack.prior_s2_shape * math.log(pack.prior_s2_scale)
    )
    lp += pack.weight_logprior_const
    for k in range(m):
        ck = pack.conc[k]
        if ck != 1.0:
            lp += (ck - 1.0) * log_weights[k]

    lp_theta = ll + lp
    if not math.isfinite(lp_theta):
        return _NEG_INF, _NEG_INF
    return lp_theta, lp_theta + log_mu + log_s2 + stick_jac


def _chol_lower(a: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def run_chain(
    pack: ModelPack,
    w0: np.ndarray,
    normals: np.ndarray,
    uniforms: np.ndarray,
    burn_in: int,
    adapt_start: int,
    init_scale: float,
):
    """Adaptive Metropolis in working coordinates.

    Proposal covariance after ``adapt_start`` is the running empirical
    covariance of the whole chain history scaled by 2.38^2/d, with a
    1e-10 diagonal regularizer.  Returns post burn-in working states,
    their model-coordinate log posteriors, and per-step accept flags.
    """
    d = w0.size
    steps = normals.shape[0]
    kept = steps - burn_in
    states = np.empty((kept, d))
    logposts = np.empty(kept)
    accepts = np.zeros(steps, dtype=np.uint8)

    cur = np.asarray(w0, dtype=float).copy()
    lpt, lpw = eval_logpost(pack, cur)
    if not math.isfinite(lpw):
        raise ValueError("chain must start at a point of positive posterior density")

    mean = np.zeros(d)
    m2 = np.zeros((d, d))
    count = 0
    scale = (2.38**2) / d
    chol = None

    for t in range(steps):
        count += 1
        delta = cur - mean
        mean += delta / count
        m2 += np.outer(delta, cur - mean)

        use_adapted = t >= adapt_start and count > 2 * d
        if use_adapted:
            cov = m2 / (count - 1)
            if np.trace(cov) > 0.0:
                chol = _chol_lower(scale * (cov + 1e-10 * np.eye(d)))
            else:
                chol = None
        step_vec = (
            chol @ normals[t] if (use_adapted and chol is not None) else init_scale * normals[t]
        )
        prop = cur + step_vec
        lpt_p, lpw_p = eval_logpost(pack, prop)
        u = uniforms[t]
        log_u = math.log(u) if u > 0.0 else _NEG_INF
        if lpw_p - lpw > log_u:
            cur = prop
            lpt, lpw = lpt_p, lpw_p
            accepts[t] = 1
        if t >= burn_in:
            states[t - burn_in] = cur
            logposts[t - burn_in] = lpt

    return states, logposts, accepts
