"""
Pareamento paralelo dentro de cada nível de tratamento

Em cada subconjunto de tratamento, cada unidade moderada (S=1) é pareada por
Mahalanobis, com reposição, à unidade S=0 mais próxima. A estimativa é o ATME
entre as unidades moderadas.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.core.models.dataset import Dataset, split_by_treatment
from src.core.models.results import EstimateResult, Method, SubsetComponents
from src.services.numeric.matching import MatchSet, mahalanobis_match
from .balance import balance_table
from .common import DEFAULT_OPTIONS, EstimatorOptions, bootstrap_variance, require_both_moderator_levels
from .registry import register

logger = logging.getLogger(__name__)


def matched_effect(subset: Dataset, level: int) -> Tuple[float, float, MatchSet]:
    """
    Efeito médio dos pares dentro de um subconjunto.

    Variância: var(d)/n₁ + Σⱼ(Kⱼ² − Kⱼ)·s²₀/n₁², com s²₀ a variância de Y
    entre as unidades S=0 do subconjunto e Kⱼ o número de usos do controle j.
    Com uma única unidade moderada a variância é NaN (indefinida).

    Returns:
        (efeito, variância, pareamento)
    """
    require_both_moderator_levels(subset, level)
    match = mahalanobis_match(subset.x, subset.s)
    diffs = subset.y[match.target_indices] - subset.y[match.matched_indices]
    n1 = diffs.size
    if n1 < 2:
        logger.debug(f"🔍 T={level}: uma unidade moderada, variância do pareamento indefinida")
        return float(diffs.mean()), math.nan, match

    y0 = subset.y[subset.s == 0]
    s2_0 = float(np.var(y0, ddof=1)) if y0.size > 1 else 0.0
    k = np.array(list(match.multiplicities.values()), dtype=np.float64)
    reuse = float(np.sum(k * k - k))
    variance = float(np.var(diffs, ddof=1)) / n1 + reuse * s2_0 / n1 ** 2
    return float(diffs.mean()), variance, match


def _effect_only(level: int):
    def statistic(sample: Dataset) -> float:
        return matched_effect(sample, level)[0]

    return statistic


def _summary(match: MatchSet) -> dict:
    k = np.array(list(match.multiplicities.values()))
    return {
        "n_targets": int(match.target_indices.size),
        "controls_used": int(k.size),
        "max_multiplicity": int(k.max()),
        "metric": match.metadata["metric"],
        "ridge": match.metadata["ridge"],
    }


@register(Method.PARALLEL_MATCHING)
def parallel_matching(ds: Dataset, options: Optional[EstimatorOptions] = None) -> EstimateResult:
    """
    δ̂ = (efeito pareado em T=1) − (efeito pareado em T=0).

    Com `bootstrap_reps > 0` a variância de cada subconjunto vem de um bootstrap
    que repete o pareamento em cada réplica (clusters quando houver rótulos).
    Esse bootstrap é sabidamente imperfeito sob pareamento com reposição.
    """
    options = options or DEFAULT_OPTIONS
    subsets = split_by_treatment(ds)
    effects, variances, matches = [], [], []
    for level, subset in enumerate(subsets):
        effect, variance, match = matched_effect(subset, level)
        effects.append(effect)
        variances.append(variance)
        matches.append(match)

    diagnostics = {
        "estimand": "ATME entre as unidades moderadas (S=1)",
        "matching": {f"T{level}": _summary(m) for level, m in enumerate(matches)},
        "variance_method": "multiplicity_corrected",
    }

    reps = options.resolve_bootstrap_reps()
    if reps > 0:
        root = np.random.SeedSequence(options.seed)
        for level, (subset, child) in enumerate(zip(subsets, root.spawn(2))):
            variances[level], ok, failed = bootstrap_variance(subset, _effect_only(level), reps, child)
            diagnostics[f"bootstrap_T{level}"] = {"reps_ok": ok, "failed": failed}
        diagnostics["variance_method"] = "cluster_bootstrap" if ds.has_clusters else "bootstrap"

    diagnostics["balance"] = balance_table(ds, (matches[0], matches[1])).to_dict()
    components = SubsetComponents(gamma0=effects[0], var0=variances[0], gamma1=effects[1], var1=variances[1])
    return EstimateResult.from_components(
        Method.PARALLEL_MATCHING,
        components,
        options.resolve_level(),
        ds.cell_counts(),
        diagnostics=diagnostics,
    )
