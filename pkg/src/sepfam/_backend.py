"""Backend selection and model-pack construction for the chain kernels.

The compiled kernel (``sepfam._core``) is preferred when it imported
cleanly; set ``SEPFAM_BACKEND=python`` or ``=compiled`` to force one.
Both expose ``eval_logpost`` and ``run_chain`` with identical contracts
(see ``sepfam._core_py``).
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import _core_py
from ._core_py import GAMMA_CODE, LOGNORMAL_CODE, WEIBULL_CODE, ModelPack
from .errors import DomainError
from .families import FamilyId
from .mixture import MixtureSpec

try:
    from . import _core
except ImportError:  # pragma: no cover - depends on the build environment
    _core = None

_FAMILY_CODES = {
    FamilyId.LOGNORMAL: LOGNORMAL_CODE,
    FamilyId.GAMMA: GAMMA_CODE,
    FamilyId.WEIBULL: WEIBULL_CODE,
}


def _select():
    forced = os.environ.get("SEPFAM_BACKEND", "").strip().lower()
    if forced == "python":
        return _core_py, "python"
    if forced == "compiled":
        if _core is None:
            raise ImportError(
                "SEPFAM_BACKEND=compiled but sepfam._core is not built; "
                "run `pip install -e . --no-build-isolation` or unset the variable"
            )
        return _core, "compiled"
    if forced:
        raise ValueError(f"unknown SEPFAM_BACKEND value {forced!r}")
    if _core is not None:
        return _core, "compiled"
    return _core_py, "python"


_impl, BACKEND = _select()


def backend_name() -> str:
    """Name of the kernel backend in use ('compiled' or 'python')."""
    return BACKEND


def eval_logpost(pack: ModelPack, w) -> tuple[float, float]:
    return _impl.eval_logpost(pack, np.asarray(w, dtype=float))


def run_chain(pack, w0, normals, uniforms, burn_in, adapt_start, init_scale):
    return _impl.run_chain(
        pack,
        np.asarray(w0, dtype=float),
        normals,
        uniforms,
        int(burn_in),
        int(adapt_start),
        float(init_scale),
    )


def build_pack(spec: MixtureSpec, data, active: tuple[int, ...] | None = None) -> ModelPack:
    """Pack (a submodel of) the mixture and data for the kernels.

    ``active`` lists the component indices that remain free; omitted
    components are pinned at weight zero, and their share of the full
    Dirichlet prior density folds into the pack constant so that the
    submodel posterior stays on the full-model density scale.
    """
    y = np.ascontiguousarray(data, dtype=float)
    if y.size and (np.any(y <= 0.0) or not np.all(np.isfinite(y))):
        raise DomainError("data must be strictly positive and finite")
    m = spec.n_components
    if active is None:
        active = tuple(range(m))
    if not active or any(not 0 <= k < m for k in active) or len(set(active)) != len(active):
        raise DomainError(f"invalid active component set {active}")

    conc_full = spec.weight_concentration
    const = math.lgamma(sum(conc_full)) - sum(math.lgamma(c) for c in conc_full)
    for k in range(m):
        if k not in active and conc_full[k] != 1.0:
            # (c_k - 1) * log(0) with c_k > 1: the prior vanishes on this face.
            const = float("-inf")

    return ModelPack(
        y=y,
        log_y=np.log(y) if y.size else np.empty(0),
        fam_codes=np.array([_FAMILY_CODES[spec.components[k]] for k in active], dtype=np.int32),
        conc=np.array([conc_full[k] for k in active], dtype=float),
        weight_logprior_const=const,
        prior_mu_shape=spec.prior_mu[0],
        prior_mu_scale=spec.prior_mu[1],
        prior_s2_shape=spec.prior_sigma2[0],
        prior_s2_scale=spec.prior_sigma2[1],
    )
