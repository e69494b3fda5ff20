"""Survival curves for fitted models and the raw data.

Model curves are 1 - CDF at native or mean/variance parameters; mixture
curves are the weight-averaged component curves.  The empirical curve is
the right-continuous complement of the ECDF, a plain step-function stand
in for smoothed survival estimators when exporting comparison plots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .families import (
    FamilyId,
    FamilyParams,
    GammaParams,
    LognormalParams,
    WeibullParams,
    from_common,
)
from .mixture import MixtureSpec, MixtureState
from .numerics import regularized_gamma_p, std_normal_cdf


@dataclass(frozen=True)
class SurvivalCurve:
    """Nonincreasing values of S(t) on an increasing grid."""

    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.size != values.size:
            raise DomainError("grid and values must have equal length")
        if np.any(values < -1e-12) or np.any(values > 1.0 + 1e-12):
            raise DomainError("survival values must lie in [0, 1]")
        if np.any(np.diff(values) > 1e-12):
            raise DomainError("survival values must be nonincreasing")


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.size == 0 or np.any(g <= 0.0) or not np.all(np.isfinite(g)):
        raise DomainError("grid must be positive and finite")
    if np.any(np.diff(g) < 0.0):
        raise DomainError("grid must be sorted ascending")
    return g


def family_cdf(family: FamilyId, params: FamilyParams, grid: np.ndarray) -> np.ndarray:
    if family is FamilyId.LOGNORMAL:
        assert isinstance(params, LognormalParams)
        sd = math.sqrt(params.alpha2)
        return np.array(
            [std_normal_cdf((math.log(t) - params.alpha1) / sd) for t in grid]
        )
    if family is FamilyId.GAMMA:
        assert isinstance(params, GammaParams)
        return np.array(
            [regularized_gamma_p(params.gamma2, t / params.gamma1) for t in grid]
        )
    assert isinstance(params, WeibullParams)
    return -np.expm1(-((grid / params.beta1) ** params.beta2))


def model_survival(
    model: tuple[FamilyId, FamilyParams] | tuple[MixtureSpec, MixtureState],
    grid,
    label: str = "",
) -> SurvivalCurve:
    """Survival curve for a single family or a mixture state.

    Pass ``(FamilyId, params)`` for one family or
    ``(MixtureSpec, MixtureState)`` for the weighted mixture.
    """
    g = _check_grid(grid)
    head, tail = model
    if isinstance(head, FamilyId):
        values = 1.0 - family_cdf(head, tail, g)
        label = label or head.value
    elif isinstance(head, MixtureSpec):
        spec, state = head, tail
        values = np.zeros_like(g)
        for k, fam in enumerate(spec.components):
            w = state.weights[k]
            if w == 0.0:
                continue
            params = from_common(fam, state.cp)
            values += w * (1.0 - family_cdf(fam, params, g))
        label = label or "mixture"
    else:
        raise DomainError("model must be (FamilyId, params) or (MixtureSpec, MixtureState)")
    values = np.clip(values, 0.0, 1.0)
    return SurvivalCurve(grid=g, values=values, label=label)


def empirical_survival(data, grid, label: str = "empirical") -> SurvivalCurve:
    """Right-continuous step function 1 - ECDF evaluated on the grid."""
    y = np.asarray(data, dtype=float)
    if y.size == 0:
        raise DomainError("empirical survival requires nonempty data")
    if np.any(y <= 0.0) or not np.all(np.isfinite(y)):
        raise DomainError("data must be strictly positive and finite")
    g = _check_grid(grid)
    y_sorted = np.sort(y)
    # S(t) = #{y > t} / n, right-continuous in t
    counts = y.size - np.searchsorted(y_sorted, g, side="right")
    return SurvivalCurve(grid=g, values=counts / y.size, label=label)


def export_curves_csv(path, curves: list[SurvivalCurve]) -> None:
    """Write (grid, value, label) rows for external plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("grid,value,label\n")
        for curve in curves:
            for t, s in zip(curve.grid, curve.values):
                fh.write(f"{t!r},{s!r},{curve.label}\n")
