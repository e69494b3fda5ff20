# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled chain kernels.

Reference semantics live in ``sepfam._core_py``; this module is the same
algorithm with the per-step work (mixture density, shape root solve,
covariance adaptation, accept/reject) in C.  Randomness is pre-drawn by
the caller, so a chain is reproducible bit-for-bit within this backend
and agrees with the fallback up to floating-point summation order.
"""

from libc.math cimport exp, log, log1p, lgamma, sqrt, INFINITY, isfinite, fabs, M_PI

import numpy as np

cdef enum:
    MAXDIM = 16  # supports up to 15 mixture components

backend_name = "compiled"


cdef double _digamma(double x) nogil:
    cdef double result = 0.0
    cdef double inv, inv2
    while x < 6.0:
        result -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    result += log(x) - 0.5 * inv - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
    return result


cdef double _weibull_shape(double cv2, double init) nogil:
    """Shape matching cv^2, or 0.0 when no root lies in [1e-3, 1e3]."""
    cdef double log_term = log1p(cv2)
    cdef double lo = 1e-3
    cdef double hi = 1e3
    cdef double b, fb, f_lo, f_hi, slope, b_new
    cdef int i

    f_hi = 2.0 * lgamma(1.0 + 1.0 / hi) - lgamma(1.0 + 2.0 / hi) + log_term
    if f_hi <= 0.0:
        return 0.0
    f_lo = 2.0 * lgamma(1.0 + 1.0 / lo) - lgamma(1.0 + 2.0 / lo) + log_term
    if f_lo >= 0.0:
        return 0.0

    if lo < init < hi:
        b = init
    else:
        b = exp(-0.543 * log(cv2))
        if b < lo * 1.01:
            b = lo * 1.01
        elif b > hi * 0.99:
            b = hi * 0.99
    fb = 2.0 * lgamma(1.0 + 1.0 / b) - lgamma(1.0 + 2.0 / b) + log_term
    for i in range(100):
        if fabs(fb) <= 1e-13:
            return b
        if fb < 0.0:
            lo = b
        else:
            hi = b
        slope = (2.0 / (b * b)) * (_digamma(1.0 + 2.0 / b) - _digamma(1.0 + 1.0 / b))
        if slope > 0.0:
            b_new = b - fb / slope
        else:
            b_new = 0.0
        if not (lo < b_new < hi):
            b_new = 0.5 * (lo + hi)
        if b_new == b:
            return b
        b = b_new
        fb = 2.0 * lgamma(1.0 + 1.0 / b) - lgamma(1.0 + 2.0 / b) + log_term
    if fabs(fb) <= 1e-9:
        return b
    return 0.0


cdef bint _eval(const double* y, const double* log_y, Py_ssize_t n,
                const int* fam, const double* conc, int m,
                double w_const, double pm_sh, double pm_sc,
                double ps_sh, double ps_sc,
                const double* w, double shape_init,
                double* lp_theta, double* lp_working) nogil:
    """Evaluate the (sub)model posterior at working point w.

    Returns True with both outputs set, or False for zero posterior
    density (outputs forced to -inf).
    """
    cdef int d = 2 + m - 1
    cdef int i, k
    cdef Py_ssize_t j
    cdef double log_mu, log_s2, mu, s2, cv2
    cdef double log_w[MAXDIM]
    cdef double pa[MAXDIM]
    cdef double pb[MAXDIM]
    cdef double pc[MAXDIM]
    cdef double pinv[MAXDIM]
    cdef double terms[MAXDIM]
    cdef double log_jac, log_stick, t, log_v, log_1mv
    cdef double ll, lp, term, top, acc, ly, ck
    cdef double a1, a2, g2, log_g1, b2, log_b1

    lp_theta[0] = -INFINITY
    lp_working[0] = -INFINITY

    for i in range(d):
        if not isfinite(w[i]):
            return False
    log_mu = w[0]
    log_s2 = w[1]
    mu = exp(log_mu)
    s2 = exp(log_s2)
    if not (mu > 0.0 and isfinite(mu) and s2 > 0.0 and isfinite(s2)):
        return False

    # centered stick-breaking: logits -> log weights + log Jacobian
    log_jac = 0.0
    log_stick = 0.0
    for i in range(m - 1):
        t = w[2 + i] - log(m - 1.0 - i)
        if t > -35.0:
            log_v = -log1p(exp(-t))
        else:
            log_v = t
        if t < 35.0:
            log_1mv = -log1p(exp(t))
        else:
            log_1mv = -t
        log_w[i] = log_stick + log_v
        log_jac += log_v + log_1mv + log_stick
        log_stick += log_1mv
    log_w[m - 1] = log_stick

    cv2 = s2 / (mu * mu)
    ll = 0.0
    if n > 0:
        for k in range(m):
            if fam[k] == 0:  # lognormal
                a2 = log1p(cv2)
                a1 = log_mu - 0.5 * a2
                pa[k] = a1
                pb[k] = 2.0 * a2
                pc[k] = -0.5 * log(a2) - 0.5 * log(2.0 * M_PI)
                pinv[k] = 0.0
            elif fam[k] == 1:  # gamma
                g2 = 1.0 / cv2
                log_g1 = log_s2 - log_mu
                pa[k] = g2
                pb[k] = log_g1
                pc[k] = -lgamma(g2) - g2 * log_g1
                pinv[k] = exp(-log_g1)
            else:  # weibull
                b2 = _weibull_shape(cv2, shape_init)
                if b2 <= 0.0:
                    return False
                log_b1 = log_mu - lgamma(1.0 + 1.0 / b2)
                pa[k] = b2
                pb[k] = log_b1
                pc[k] = log(b2) - b2 * log_b1
                pinv[k] = 0.0
            if not isfinite(pc[k]):
                return False

        for j in range(n):
            ly = log_y[j]
            top = -INFINITY
            for k in range(m):
                if fam[k] == 0:
                    term = -ly + pc[k] - (ly - pa[k]) * (ly - pa[k]) / pb[k]
                elif fam[k] == 1:
                    term = pc[k] + (pa[k] - 1.0) * ly - y[j] * pinv[k]
                else:
                    term = pc[k] + (pa[k] - 1.0) * ly - exp(pa[k] * (ly - pb[k]))
                terms[k] = term + log_w[k]
                if terms[k] > top:
                    top = terms[k]
            if not isfinite(top):
                return False
            acc = 0.0
            for k in range(m):
                acc += exp(terms[k] - top)
            ll += top + log(acc)
        if not isfinite(ll):
            return False

    lp = (pm_sh - 1.0) * log_mu - mu / pm_sc - lgamma(pm_sh) - pm_sh * log(pm_sc)
    lp += (ps_sh - 1.0) * log_s2 - s2 / ps_sc - lgamma(ps_sh) - ps_sh * log(ps_sc)
    lp += w_const
    for k in range(m):
        ck = conc[k]
        if ck != 1.0:
            lp += (ck - 1.0) * log_w[k]

    if not isfinite(ll + lp):
        return False
    lp_theta[0] = ll + lp
    lp_working[0] = ll + lp + log_mu + log_s2 + log_jac
    return True


cdef bint _chol_lower(const double* a, double* L, int d) nogil:
    """Lower Cholesky factor of a (row-major d x d); False if not PD."""
    cdef int i, j, k
    cdef double s
    for i in range(d):
        for j in range(i + 1):
            s = a[i * d + j]
            for k in range(j):
                s -= L[i * d + k] * L[j * d + k]
            if i == j:
                if s <= 0.0:
                    return False
                L[i * d + i] = sqrt(s)
            else:
                L[i * d + j] = s / L[j * d + j]
    return True


def eval_logpost(pack, w, double shape_init=0.0):
    """(model-coordinate log posterior, working-coordinate log density)."""
    cdef double[::1] yv = np.ascontiguousarray(pack.y, dtype=np.float64)
    cdef double[::1] lyv = np.ascontiguousarray(pack.log_y, dtype=np.float64)
    cdef int[::1] famv = np.ascontiguousarray(pack.fam_codes, dtype=np.int32)
    cdef double[::1] concv = np.ascontiguousarray(pack.conc, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef int m = famv.shape[0]
    if m + 1 > MAXDIM:
        raise ValueError("too many mixture components for the compiled kernel")
    if wv.shape[0] != m + 1:
        raise ValueError("working point has wrong dimension")
    cdef double lpt, lpw
    cdef double wconst = pack.weight_logprior_const
    cdef double pm_sh = pack.prior_mu_shape
    cdef double pm_sc = pack.prior_mu_scale
    cdef double ps_sh = pack.prior_s2_shape
    cdef double ps_sc = pack.prior_s2_scale
    _eval(&yv[0] if yv.shape[0] else NULL,
          &lyv[0] if lyv.shape[0] else NULL,
          yv.shape[0], &famv[0], &concv[0], m,
          wconst, pm_sh, pm_sc, ps_sh, ps_sc,
          &wv[0], shape_init, &lpt, &lpw)
    return lpt, lpw


def run_chain(pack, w0, normals, uniforms, int burn_in, int adapt_start,
              double init_scale):
    """Adaptive Metropolis; see sepfam._core_py.run_chain for semantics."""
    cdef double[::1] yv = np.ascontiguousarray(pack.y, dtype=np.float64)
    cdef double[::1] lyv = np.ascontiguousarray(pack.log_y, dtype=np.float64)
    cdef int[::1] famv = np.ascontiguousarray(pack.fam_codes, dtype=np.int32)
    cdef double[::1] concv = np.ascontiguousarray(pack.conc, dtype=np.float64)
    cdef double wconst = pack.weight_logprior_const
    cdef double pm_sh = pack.prior_mu_shape
    cdef double pm_sc = pack.prior_mu_scale
    cdef double ps_sh = pack.prior_s2_shape
    cdef double ps_sc = pack.prior_s2_scale

    cdef double[::1] w0v = np.ascontiguousarray(w0, dtype=np.float64)
    cdef double[:, ::1] normv = np.ascontiguousarray(normals, dtype=np.float64)
    cdef double[::1] univ = np.ascontiguousarray(uniforms, dtype=np.float64)

    cdef int m = famv.shape[0]
    cdef int d = w0v.shape[0]
    cdef Py_ssize_t n = yv.shape[0]
    cdef Py_ssize_t steps = normv.shape[0]
    if d != m + 1 or d > MAXDIM - 1:
        raise ValueError("working dimension does not match the model pack")
    if normv.shape[1] != d or univ.shape[0] != steps:
        raise ValueError("random stream shapes do not match")
    if burn_in < 0 or burn_in >= steps:
        raise ValueError("burn_in must lie inside the chain")

    cdef Py_ssize_t kept = steps - burn_in
    states_arr = np.empty((kept, d), dtype=np.float64)
    logposts_arr = np.empty(kept, dtype=np.float64)
    accepts_arr = np.zeros(steps, dtype=np.uint8)
    cdef double[:, ::1] states = states_arr
    cdef double[::1] logposts = logposts_arr
    cdef unsigned char[::1] accepts = accepts_arr

    cdef double cur[MAXDIM]
    cdef double prop[MAXDIM]
    cdef double mean[MAXDIM]
    cdef double delta[MAXDIM]
    cdef double m2[MAXDIM * MAXDIM]
    cdef double covbuf[MAXDIM * MAXDIM]
    cdef double Lmat[MAXDIM * MAXDIM]
    cdef double lpt, lpw, lpt_p, lpw_p, u, log_u, trace, s
    cdef bint have_chol = False
    cdef bint use_adapted, ok
    cdef Py_ssize_t t, count = 0
    cdef int i, j2
    cdef double scale = (2.38 * 2.38) / d
    cdef const double* yp = &yv[0] if n else NULL
    cdef const double* lyp = &lyv[0] if n else NULL

    for i in range(d):
        cur[i] = w0v[i]
        mean[i] = 0.0
    for i in range(d * d):
        m2[i] = 0.0

    _eval(yp, lyp, n, &famv[0], &concv[0], m, wconst, pm_sh, pm_sc,
          ps_sh, ps_sc, cur, 0.0, &lpt, &lpw)
    if not isfinite(lpw):
        raise ValueError("chain must start at a point of positive posterior density")

    with nogil:
        for t in range(steps):
            count += 1
            for i in range(d):
                delta[i] = cur[i] - mean[i]
            for i in range(d):
                mean[i] += delta[i] / count
            for i in range(d):
                for j2 in range(d):
                    m2[i * d + j2] += delta[i] * (cur[j2] - mean[j2])

            use_adapted = t >= adapt_start and count > 2 * d
            if use_adapted:
                trace = 0.0
                for i in range(d):
                    trace += m2[i * d + i] / (count - 1)
                if trace > 0.0:
                    for i in range(d):
                        for j2 in range(d):
                            covbuf[i * d + j2] = scale * (m2[i * d + j2] / (count - 1))
                        covbuf[i * d + i] += scale * 1e-10
                    have_chol = _chol_lower(covbuf, Lmat, d)
                else:
                    have_chol = False

            if use_adapted and have_chol:
                for i in range(d):
                    s = 0.0
                    for j2 in range(i + 1):
                        s += Lmat[i * d + j2] * normv[t, j2]
                    prop[i] = cur[i] + s
            else:
                for i in range(d):
                    prop[i] = cur[i] + init_scale * normv[t, i]

            _eval(yp, lyp, n, &famv[0], &concv[0], m, wconst, pm_sh, pm_sc,
                  ps_sh, ps_sc, prop, 0.0, &lpt_p, &lpw_p)
            u = univ[t]
            if u > 0.0:
                log_u = log(u)
            else:
                log_u = -INFINITY
            if lpw_p - lpw > log_u:
                for i in range(d):
                    cur[i] = prop[i]
                lpt = lpt_p
                lpw = lpw_p
                accepts[t] = 1
            if t >= burn_in:
                for i in range(d):
                    states[t - burn_in, i] = cur[i]
                logposts[t - burn_in] = lpt

    return states_arr, logposts_arr, accepts_arr
