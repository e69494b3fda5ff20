"""sepfam: choosing between lognormal, gamma, and Weibull models.

Evidence-based selection on a shared mean/variance mixture of the
candidate families, plus the classical Cox test for the
lognormal/Weibull pair, a Monte Carlo study harness, and a CLI.
"""

from .coxtest import CoxResult, cox_lognormal_null, cox_weibull_null
from .families import (
    CommonParams,
    FamilyId,
    GammaParams,
    LognormalParams,
    WeibullParams,
    from_common,
    logpdf_common,
    logpdf_native,
    mle_lognormal,
    mle_weibull,
)
from .fbst import (
    EvidenceResult,
    FbstConfig,
    HypothesisSpec,
    Verdict,
    constrained_supremum,
    diniz_pvalue,
    e_value,
    evidence_table,
    run_chain,
    threshold_c,
    weight_is_one,
    weight_is_zero,
)
from .mixture import MixtureSpec, MixtureState, loglik, logposterior, logprior
from .survival import SurvivalCurve, empirical_survival, model_survival

__version__ = "0.1.0"

__all__ = [
    "CommonParams",
    "CoxResult",
    "EvidenceResult",
    "FamilyId",
    "FbstConfig",
    "GammaParams",
    "HypothesisSpec",
    "LognormalParams",
    "MixtureSpec",
    "MixtureState",
    "SurvivalCurve",
    "Verdict",
    "WeibullParams",
    "constrained_supremum",
    "cox_lognormal_null",
    "cox_weibull_null",
    "diniz_pvalue",
    "e_value",
    "empirical_survival",
    "evidence_table",
    "from_common",
    "logpdf_common",
    "logpdf_native",
    "loglik",
    "logposterior",
    "logprior",
    "mle_lognormal",
    "mle_weibull",
    "model_survival",
    "run_chain",
    "threshold_c",
    "weight_is_one",
    "weight_is_zero",
]
