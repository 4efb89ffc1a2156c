"""
Primitivas numéricas: mínimos quadrados, logística, pareamento e EM
"""

from .least_squares import LinearFit, least_squares_fit, mean_variance
from .logistic import LogisticFit, logistic_fit
from .matching import MatchSet, mahalanobis_match
from .mixture import MixtureMLEResult, mixture_mle

__all__ = [
    "LinearFit",
    "least_squares_fit",
    "mean_variance",
    "LogisticFit",
    "logistic_fit",
    "MatchSet",
    "mahalanobis_match",
    "MixtureMLEResult",
    "mixture_mle",
]
