"""
Tabela de balanço de covariáveis (diferença de médias padronizada)
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.core.errors import InsufficientDataError
from src.core.models.dataset import Dataset, split_by_treatment
from src.core.models.results import BalanceReport, CovariateBalance
from src.services.numeric.matching import MatchSet

logger = logging.getLogger(__name__)

FLAG_ZERO_VARIANCE = "zero_variance"
FLAG_NON_COMPUTABLE = "non_computable"


def _var(values: np.ndarray) -> float:
    return float(np.var(values, ddof=1)) if values.size > 1 else 0.0


def _smd(mean1: float, mean0: float, pooled_sd: float) -> Tuple[Optional[float], Optional[str]]:
    if pooled_sd > 0.0:
        return (mean1 - mean0) / pooled_sd, None
    if mean1 == mean0:
        return 0.0, FLAG_ZERO_VARIANCE
    return None, FLAG_NON_COMPUTABLE


def balance_table(ds: Dataset, matches: Optional[Tuple[MatchSet, MatchSet]] = None) -> BalanceReport:
    """
    SMD = (média S=1 − média S=0) / sqrt((var S=1 + var S=0) / 2) por braço.

    Args:
        ds: Dataset com k ≥ 1
        matches: (pareamento em T=0, pareamento em T=1), índices relativos aos
            subconjuntos de `split_by_treatment`. Depois do pareamento a média
            do grupo S=0 é ponderada pelas multiplicidades e o desvio padrão
            continua o de antes do pareamento.
    """
    if ds.k == 0:
        raise InsufficientDataError("balanço de covariáveis exige ao menos uma covariável")

    rows: List[CovariateBalance] = []
    sizes: Dict[int, Dict[str, float]] = {}
    for level, subset in enumerate(split_by_treatment(ds)):
        moderated = subset.s == 1
        x1, x0 = subset.x[moderated], subset.x[~moderated]
        sizes[level] = {"n_moderated": int(x1.shape[0]), "n_unmoderated": int(x0.shape[0])}
        match = matches[level] if matches is not None else None
        if match is not None:
            k_used = np.array(list(match.multiplicities.values()), dtype=np.float64)
            sizes[level]["controls_used"] = int(k_used.size)
            sizes[level]["effective_controls"] = float(k_used.sum() ** 2 / np.sum(k_used ** 2))
            # médias dos controles na ordem dos alvos = média ponderada pela multiplicidade
            x_matched = subset.x[match.matched_indices]
            x_targets = subset.x[match.target_indices]

        for j, name in enumerate(subset.covariate_names):
            mean1 = float(x1[:, j].mean()) if x1.shape[0] else math.nan
            mean0 = float(x0[:, j].mean()) if x0.shape[0] else math.nan
            sd = math.sqrt((_var(x1[:, j]) + _var(x0[:, j])) / 2.0)
            before, flag = _smd(mean1, mean0, sd)
            after = None
            if match is not None:
                after, flag_after = _smd(float(x_targets[:, j].mean()), float(x_matched[:, j].mean()), sd)
                flag = flag or flag_after
            rows.append(CovariateBalance(name, level, before, after, flag))

    flagged = [r for r in rows if r.flag is not None]
    if flagged:
        logger.warning(f"⚠️ {len(flagged)} covariável(is) com variância zero no balanço")
    return BalanceReport(rows=tuple(rows), sample_sizes=sizes, matched=matches is not None)
