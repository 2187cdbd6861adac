"""Statistical engines behind the rating analyses.

Linear models with classical inference, BIC-driven bidirectional stepwise
selection, a random-intercept linear mixed model fit by profiled maximum
likelihood, and logistic regression via iteratively reweighted least
squares. All fits are deterministic, pure functions of their inputs.
"""

from .design import CategoricalTerm, ContinuousTerm, DesignMatrix, DesignSpec, build_design
from .distributions import normal_two_sided_p, regularized_incomplete_beta, student_t_two_sided_p
from .linear import ModelFit, RankDeficientDesignError, bic_of, l_star_ratios, ols_fit
from .logistic import SeparationError, logistic_fit
from .mixed import MixedFit, lmm_fit
from .stepwise import StepwiseResult, stepwise_bic

__all__ = [
    "CategoricalTerm",
    "ContinuousTerm",
    "DesignMatrix",
    "DesignSpec",
    "build_design",
    "normal_two_sided_p",
    "regularized_incomplete_beta",
    "student_t_two_sided_p",
    "ModelFit",
    "RankDeficientDesignError",
    "bic_of",
    "l_star_ratios",
    "ols_fit",
    "SeparationError",
    "logistic_fit",
    "MixedFit",
    "lmm_fit",
    "StepwiseResult",
    "stepwise_bic",
]
