"""
Estimators Package

Estimadores do ATME e baselines convencionais, todos com a assinatura
`(ds, options) -> EstimateResult` e registrados por `Method`.
"""

from .common import EstimateP, EstimatorOptions, KnownP, KnownPi, LogisticPi
from .registry import get_estimator, register, registered_methods, run_estimator, run_estimators
from .baselines import controlled_interaction, subset_difference
from .regression import full_interaction, parallel_regression
from .matching import parallel_matching
from .weighting import parallel_weighting, propensity_weighting
from .balance import balance_table

__all__ = [
    "EstimateP",
    "EstimatorOptions",
    "KnownP",
    "KnownPi",
    "LogisticPi",
    "get_estimator",
    "register",
    "registered_methods",
    "run_estimator",
    "run_estimators",
    "controlled_interaction",
    "subset_difference",
    "full_interaction",
    "parallel_regression",
    "parallel_matching",
    "parallel_weighting",
    "propensity_weighting",
    "balance_table",
]
