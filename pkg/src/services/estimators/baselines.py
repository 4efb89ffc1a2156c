"""
Estimadores convencionais (comparação)

Nenhum dos dois estima o ATME sem viés quando o moderador não é aleatório:
a diferença entre subconjuntos descreve heterogeneidade do efeito do
tratamento; a regressão com interação controlada omite os termos T·X.
"""

import logging
from typing import Dict, Optional, Tuple

import numpy as np

from src.core.models.dataset import Dataset
from src.core.models.results import EstimateResult, Method
from src.services.numeric.least_squares import least_squares_fit, mean_variance
from .common import DEFAULT_OPTIONS, EstimatorOptions, require_cells, subset_clusters
from .registry import register

logger = logging.getLogger(__name__)


def _cell_mean(ds: Dataset, t: int, s: int, options: EstimatorOptions) -> Tuple[float, float]:
    mask = (ds.t == t) & (ds.s == s)
    mode = options.resolve_mode(ds)
    cell = ds.take(np.flatnonzero(mask))
    return mean_variance(cell.y, mode, subset_clusters(cell, mode))


@register(Method.SUBSET_DIFFERENCE)
def subset_difference(ds: Dataset, options: Optional[EstimatorOptions] = None) -> EstimateResult:
    """
    [E(Y|T=1,S=1) − E(Y|T=0,S=1)] − [E(Y|T=1,S=0) − E(Y|T=0,S=0)] por médias de célula.

    A variância é a soma das variâncias das quatro médias de célula.
    """
    options = options or DEFAULT_OPTIONS
    require_cells(ds)
    means: Dict[str, float] = {}
    variance = 0.0
    for t in (1, 0):
        for s in (1, 0):
            m, v = _cell_mean(ds, t, s, options)
            means[f"T{t}S{s}"] = m
            variance += v

    cate_s1 = means["T1S1"] - means["T0S1"]
    cate_s0 = means["T1S0"] - means["T0S0"]
    return EstimateResult.build(
        Method.SUBSET_DIFFERENCE,
        cate_s1 - cate_s0,
        variance,
        options.resolve_level(),
        ds.cell_counts(),
        diagnostics={
            "cate_s1": cate_s1,
            "cate_s0": cate_s0,
            "cell_means": means,
            "variance_mode": options.resolve_mode(ds).value,
            "interpretation": "descritor de heterogeneidade, não estimador do ATME",
        },
    )


@register(Method.CONTROLLED_INTERACTION)
def controlled_interaction(ds: Dataset, options: Optional[EstimatorOptions] = None) -> EstimateResult:
    """Coeficiente de T·S em Y ~ 1 + T + S + X + T·S (sem T·X)"""
    options = options or DEFAULT_OPTIONS
    require_cells(ds)
    mode = options.resolve_mode(ds)
    t = ds.t.astype(np.float64)
    s = ds.s.astype(np.float64)
    design = np.column_stack([np.ones(ds.n), t, s, ds.x, t * s])
    names = ("const", "t", "s", *ds.covariate_names, "t:s")
    fit = least_squares_fit(design, ds.y, mode, subset_clusters(ds, mode), names)
    return EstimateResult.build(
        Method.CONTROLLED_INTERACTION,
        fit.coef("t:s"),
        fit.var("t:s"),
        options.resolve_level(),
        ds.cell_counts(),
        diagnostics={"biased_for_atme": True, "variance_mode": mode.value},
    )
