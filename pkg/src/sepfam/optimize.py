"""Fletcher-Reeves conjugate gradient minimization.

Small unconstrained minimizer used for the constrained posterior
supremum: central-difference gradients, backtracking (Armijo) line
search, and a steepest-descent restart whenever the conjugate direction
stops being a descent direction.  Objectives may return -inf/+inf for
out-of-domain points; the line search simply backtracks off them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 50


@dataclass
class CgResult:
    x: np.ndarray
    fval: float
    iterations: int
    n_eval: int
    converged: bool


def finite_diff_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, fx: float
) -> tuple[np.ndarray, int]:
    """Central-difference gradient, falling back to one-sided at domain edges."""
    n = x.size
    g = np.zeros(n)
    evals = 0
    for i in range(n):
        h = 1e-6 * (1.0 + abs(x[i]))
        xp = x.copy()
        xp[i] += h
        fp = f(xp)
        xm = x.copy()
        xm[i] -= h
        fm = f(xm)
        evals += 2
        if math.isfinite(fp) and math.isfinite(fm):
            g[i] = (fp - fm) / (2.0 * h)
        elif math.isfinite(fp):
            g[i] = (fp - fx) / h
        elif math.isfinite(fm):
            g[i] = (fx - fm) / h
        else:
            g[i] = 0.0
    return g, evals


def minimize_cg(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 500,
) -> CgResult:
    """Minimize f from x0; requires f(x0) to be finite."""
    x = np.asarray(x0, dtype=float).copy()
    fx = f(x)
    n_eval = 1
    if not math.isfinite(fx):
        return CgResult(x, fx, 0, n_eval, False)

    g, ev = finite_diff_gradient(f, x, fx)
    n_eval += ev
    d = -g
    gg = float(g @ g)
    step = 1.0

    for it in range(1, max_iter + 1):
        if math.sqrt(gg) <= tol * (1.0 + abs(fx)):
            return CgResult(x, fx, it, n_eval, True)

        slope = float(g @ d)
        if slope >= 0.0:
            d = -g
            slope = -gg
        if slope == 0.0:
            return CgResult(x, fx, it, n_eval, True)

        t = step
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            x_new = x + t * d
            f_new = f(x_new)
            n_eval += 1
            if math.isfinite(f_new) and f_new <= fx + _ARMIJO_C1 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # No progress along this direction; retry once from steepest
            # descent before giving up.
            if np.array_equal(d, -g):
                return CgResult(x, fx, it, n_eval, math.sqrt(gg) <= 100.0 * tol * (1.0 + abs(fx)))
            d = -g
            step = 1.0
            continue

        f_prev = fx
        x, fx = x_new, f_new
        # Start the next search near the last accepted step length.
        step = min(1.0, 4.0 * t)

        g_new, ev = finite_diff_gradient(f, x, fx)
        n_eval += ev
        gg_new = float(g_new @ g_new)
        if it % (2 * x.size) == 0:
            d = -g_new
        else:
            beta = gg_new / gg if gg > 0.0 else 0.0
            d = -g_new + beta * d
        g, gg = g_new, gg_new

        if abs(f_prev - fx) <= 1e-14 * (1.0 + abs(fx)) and math.sqrt(gg) <= 1e3 * tol * (1.0 + abs(fx)):
            return CgResult(x, fx, it, n_eval, True)

    return CgResult(x, fx, max_iter, n_eval, math.sqrt(gg) <= 100.0 * tol * (1.0 + abs(fx)))
