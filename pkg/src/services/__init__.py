"""
Services Package

Lógica de negócio:
- Primitivas numéricas (numeric)
- Estimadores do ATME e baselines (estimators)
- Diagnóstico de suporte comum
- Simulação / Monte Carlo
- Análise de sensibilidade
"""

from .support import check_common_support
from .simulation import generate, monte_carlo, oracle_controlled_interaction_bias, true_atme
from .sensitivity import KappaSplit, SensitivitySpec, level_curve, sensitivity_grid, sensitivity_point

__all__ = [
    "check_common_support",
    "generate",
    "monte_carlo",
    "oracle_controlled_interaction_bias",
    "true_atme",
    "KappaSplit",
    "SensitivitySpec",
    "level_curve",
    "sensitivity_grid",
    "sensitivity_point",
]
