"""
Models Package

Modelos de dados e tipos de resultado:
- Dataset validado e papéis de coluna
- EstimateResult, SupportReport, BalanceReport
- DgpConfig do processo gerador de dados
"""

from .dataset import CELL_KEYS, Dataset, Roles, bind_dataset, split_by_treatment
from .dgp import ConfounderConfig, DgpConfig, DiscreteX, StandardNormalX, UniformX
from .results import (
    BalanceReport,
    CovariateBalance,
    EstimateResult,
    Method,
    SubsetComponents,
    SupportReport,
    VarianceMode,
)

__all__ = [
    "CELL_KEYS",
    "Dataset",
    "Roles",
    "bind_dataset",
    "split_by_treatment",
    "ConfounderConfig",
    "DgpConfig",
    "DiscreteX",
    "StandardNormalX",
    "UniformX",
    "BalanceReport",
    "CovariateBalance",
    "EstimateResult",
    "Method",
    "SubsetComponents",
    "SupportReport",
    "VarianceMode",
]
