"""
Estimadores por ponderação de propensão

- PropensityWeighting: uma única média ponderada sobre todas as unidades,

      δ̂ = (1/N) Σ Yᵢ (Tᵢ − p)(Sᵢ − π̂ᵢ) / [p(1 − p) π̂ᵢ (1 − π̂ᵢ)]

- ParallelWeighting: dentro de cada braço de tratamento, contraste de Hajek
  entre S=1 e S=0 ponderado por 1/π̂ e 1/(1 − π̂); δ̂ = γ̂₁ − γ̂₀.

A incerteza de π̂ estimado não entra na variância analítica.
"""

import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.core.errors import PropensityBoundsError
from src.core.models.dataset import Dataset, split_by_treatment
from src.core.models.results import EstimateResult, Method, SubsetComponents
from src.services.numeric.least_squares import mean_variance
from src.services.numeric.logistic import logistic_fit
from .common import (
    DEFAULT_OPTIONS,
    EstimatorOptions,
    KnownP,
    KnownPi,
    bootstrap_variance,
    require_both_moderator_levels,
    subset_clusters,
)
from .registry import register

logger = logging.getLogger(__name__)


def treatment_probability(ds: Dataset, options: EstimatorOptions) -> Tuple[float, str]:
    if isinstance(options.p_spec, KnownP):
        return options.p_spec.value, "known"
    return float(np.mean(ds.t)), "sample_mean"


def moderator_propensity(ds: Dataset, options: EstimatorOptions) -> Tuple[np.ndarray, str]:
    """π(X) conhecido ou π̂(X) por logística S ~ 1 + X (média de S quando k = 0)"""
    if isinstance(options.pi_spec, KnownPi):
        pi = np.asarray(options.pi_spec.function(ds.x), dtype=np.float64).reshape(-1)
        if pi.shape[0] != ds.n:
            raise PropensityBoundsError(f"π(X) conhecido devolveu {pi.shape[0]} valores para n={ds.n}")
        return pi, "known"
    if ds.k == 0:
        return np.full(ds.n, float(np.mean(ds.s))), "moderator_share"
    design = np.hstack([np.ones((ds.n, 1)), ds.x])
    return logistic_fit(design, ds.s).predict(design), "logistic"


def bound_propensity(pi: np.ndarray, options: EstimatorOptions) -> Tuple[np.ndarray, int, Optional[Tuple[float, float]]]:
    """
    Aplica o trimming de π̂.

    Returns:
        (π usado, linhas aparadas, limites) - sem trimming, π fora de (0, 1) é erro
    """
    if not np.all(np.isfinite(pi)):
        raise PropensityBoundsError("propensão não finita")
    if options.trim:
        lo, hi = options.resolve_trim_bounds()
        trimmed = int(np.count_nonzero((pi < lo) | (pi > hi)))
        if trimmed:
            logger.info(f"ℹ️ {trimmed} propensão(ões) aparada(s) para [{lo:g}, {hi:g}]")
        return np.clip(pi, lo, hi), trimmed, (lo, hi)
    if np.any((pi <= 0.0) | (pi >= 1.0)):
        raise PropensityBoundsError("propensão fora de (0, 1) com trimming desativado")
    return pi, 0, None


def _weighting_terms(ds: Dataset, options: EstimatorOptions) -> Tuple[np.ndarray, Dict[str, Any]]:
    p, p_source = treatment_probability(ds, options)
    pi_raw, pi_source = moderator_propensity(ds, options)
    pi, trimmed, bounds = bound_propensity(pi_raw, options)
    t = ds.t.astype(np.float64)
    s = ds.s.astype(np.float64)
    h = ds.y * (t - p) * (s - pi) / (p * (1.0 - p) * pi * (1.0 - pi))
    info = {
        "p": p,
        "p_source": p_source,
        "pi_source": pi_source,
        "pi_min": float(pi_raw.min()),
        "pi_max": float(pi_raw.max()),
        "n_trimmed": trimmed,
        "trim_bounds": None if bounds is None else list(bounds),
    }
    return h, info


@register(Method.PROPENSITY_WEIGHTING)
def propensity_weighting(ds: Dataset, options: Optional[EstimatorOptions] = None) -> EstimateResult:
    """Média do termo ponderado; variância da média do termo (ou bootstrap)"""
    options = options or DEFAULT_OPTIONS
    h, diagnostics = _weighting_terms(ds, options)
    mode = options.resolve_mode(ds)
    estimate, variance = mean_variance(h, mode, subset_clusters(ds, mode))
    diagnostics["variance_method"] = mode.value

    reps = options.resolve_bootstrap_reps()
    if reps > 0:
        variance, ok, failed = bootstrap_variance(
            ds, lambda sample: float(np.mean(_weighting_terms(sample, options)[0])), reps, options.seed
        )
        diagnostics["variance_method"] = "cluster_bootstrap" if ds.has_clusters else "bootstrap"
        diagnostics["bootstrap"] = {"reps_ok": ok, "failed": failed}

    return EstimateResult.build(
        Method.PROPENSITY_WEIGHTING,
        estimate,
        variance,
        options.resolve_level(),
        ds.cell_counts(),
        diagnostics=diagnostics,
    )


def hajek_contrast(subset: Dataset, level: int, options: EstimatorOptions) -> Tuple[float, float, Dict[str, Any]]:
    """
    Contraste de Hajek S=1 vs S=0 dentro de um subconjunto de tratamento.

    Variância por linearização: média das funções de influência.
    """
    require_both_moderator_levels(subset, level)
    pi_raw, pi_source = moderator_propensity(subset, options)
    pi, trimmed, _ = bound_propensity(pi_raw, options)
    s = subset.s.astype(np.float64)
    w1 = s / pi
    w0 = (1.0 - s) / (1.0 - pi)
    mu1 = float(np.sum(w1 * subset.y) / np.sum(w1))
    mu0 = float(np.sum(w0 * subset.y) / np.sum(w0))
    n = subset.n
    influence = w1 * (subset.y - mu1) / (np.sum(w1) / n) - w0 * (subset.y - mu0) / (np.sum(w0) / n)
    mode = options.resolve_mode(subset)
    _, variance = mean_variance(influence, mode, subset_clusters(subset, mode))
    return mu1 - mu0, variance, {"pi_source": pi_source, "n_trimmed": trimmed,
                                 "pi_min": float(pi_raw.min()), "pi_max": float(pi_raw.max())}


@register(Method.PARALLEL_WEIGHTING)
def parallel_weighting(ds: Dataset, options: Optional[EstimatorOptions] = None) -> EstimateResult:
    options = options or DEFAULT_OPTIONS
    gammas, variances, info = [], [], {}
    for level, subset in enumerate(split_by_treatment(ds)):
        gamma, variance, details = hajek_contrast(subset, level, options)
        gammas.append(gamma)
        variances.append(variance)
        info[f"T{level}"] = details
    components = SubsetComponents(gamma0=gammas[0], var0=variances[0], gamma1=gammas[1], var1=variances[1])
    return EstimateResult.from_components(
        Method.PARALLEL_WEIGHTING,
        components,
        options.resolve_level(),
        ds.cell_counts(),
        diagnostics={"propensity": info},
    )
