"""
Diagnóstico de suporte comum: 0 < P(S=1|X) < 1 dentro de cada braço de tratamento

O relatório nunca interrompe a estimação; quem chama decide o que fazer.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.core.config import get_settings
from src.core.errors import DataValidationError, NumericalError, SeparationError
from src.core.models.dataset import Dataset, split_by_treatment
from src.core.models.results import SupportReport
from src.services.numeric.logistic import logistic_fit

logger = logging.getLogger(__name__)


def _propensity_range(subset: Dataset, level: int, messages: List[str]) -> Tuple[Optional[Tuple[float, float]], bool]:
    """(faixa de π̂ no subconjunto, houve separação)"""
    if subset.n == 0:
        messages.append(f"T={level}: subconjunto vazio")
        return None, False
    share = float(np.mean(subset.s))
    if subset.k == 0 or share in (0.0, 1.0):
        return (share, share), False

    design = np.hstack([np.ones((subset.n, 1)), subset.x])
    try:
        fit = logistic_fit(design, subset.s)
    except SeparationError as e:
        messages.append(f"T={level}: separação no modelo de propensão do moderador ({e})")
        logger.warning(f"⚠️ Separação no modelo S~X dentro de T={level}")
        partial = e.partial_fit
        if partial is None:
            return None, True
        p = partial.predict(design)
        return (float(p.min()), float(p.max())), True
    except (DataValidationError, NumericalError) as e:
        messages.append(f"T={level}: modelo de propensão não estimável ({e})")
        return None, False
    if not fit.converged:
        messages.append(f"T={level}: modelo de propensão não convergiu")
    p = fit.predict(design)
    return (float(p.min()), float(p.max())), False


def check_common_support(ds: Dataset, epsilon: Optional[float] = None) -> SupportReport:
    """
    Contagens por célula (T,S) e faixa da propensão do moderador por braço.

    Args:
        ds: Dataset validado
        epsilon: Limite ε dos flags de fronteira (padrão: SUPPORT_EPSILON)

    Returns:
        SupportReport com flags consistentes com as contagens e faixas
    """
    eps = get_settings().SUPPORT_EPSILON if epsilon is None else float(epsilon)
    if not 0.0 < eps < 0.5:
        raise DataValidationError(f"epsilon deve estar em (0, 0.5): {eps}")

    counts = ds.cell_counts()
    empty = [cell for cell, c in counts.items() if c == 0]
    messages: List[str] = [f"célula vazia: {cell}" for cell in empty]

    ranges: Dict[int, Optional[Tuple[float, float]]] = {}
    separation: Dict[int, bool] = {}
    for level, subset in enumerate(split_by_treatment(ds)):
        ranges[level], separation[level] = _propensity_range(subset, level, messages)

    within = all(rng is not None and rng[0] >= eps and rng[1] <= 1.0 - eps for rng in ranges.values())
    if not within:
        messages.append(f"propensão do moderador fora de [{eps:g}, {1 - eps:g}] em algum braço")

    report = SupportReport(
        cell_counts=counts,
        propensity_range=ranges,
        epsilon=eps,
        empty_cell=bool(empty),
        within_bounds=within,
        separation=separation,
        messages=tuple(messages),
    )
    if report.empty_cell or report.any_separation or not within:
        logger.warning(f"⚠️ Suporte comum com alertas: {'; '.join(messages)}")
    else:
        logger.info("✅ Suporte comum verificado sem alertas")
    return report
