"""
Máxima verossimilhança da mistura com confundidor binário não observado

Dentro de um subconjunto de tratamento, com U ~ B(1, 1/2) independente de X:

    P(S=1 | X, U) = logistic(ζ + Xη + α̃U)
    Y | S, X, U  ~ N(ξ + γS + Xβ + κ̃U, σ²)

(α̃, κ̃) ficam fixos; os demais parâmetros são estimados por EM.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.core.errors import DegenerateVarianceError, SingleLevelModeratorError
from src.core.models.dataset import Dataset
from src.services.numeric.least_squares import check_rank, solve_least_squares
from src.services.numeric.logistic import logistic_fit

logger = logging.getLogger(__name__)

EM_TOLERANCE = 1e-8
EM_MAX_ITERATIONS = 500
LOG_HALF = math.log(0.5)
MONOTONE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class MixtureMLEResult:
    alpha: float
    kappa: float
    selection_coefficients: np.ndarray  # (ζ, η...)
    outcome_coefficients: np.ndarray  # (ξ, γ, β...)
    sigma: float
    log_likelihood: float
    iterations: int
    converged: bool
    treatment_level: Optional[int] = None
    log_likelihood_trace: Tuple[float, ...] = ()
    monotone: bool = True
    covariate_names: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def zeta(self) -> float:
        return float(self.selection_coefficients[0])

    @property
    def eta(self) -> np.ndarray:
        return self.selection_coefficients[1:]

    @property
    def xi(self) -> float:
        return float(self.outcome_coefficients[0])

    @property
    def gamma(self) -> float:
        return float(self.outcome_coefficients[1])

    @property
    def beta(self) -> np.ndarray:
        return self.outcome_coefficients[2:]

    def summary(self) -> Dict[str, Any]:
        return {
            "treatment": self.treatment_level,
            "alpha": self.alpha,
            "kappa": self.kappa,
            "zeta": self.zeta,
            "eta": self.eta.tolist(),
            "xi": self.xi,
            "gamma": self.gamma,
            "beta": self.beta.tolist(),
            "sigma": self.sigma,
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _normal_logpdf(resid: np.ndarray, sigma2: float) -> np.ndarray:
    return -0.5 * (math.log(2.0 * math.pi * sigma2) + resid * resid / sigma2)


def _e_step(z_sel, z_out, y, s, alpha, kappa, theta_sel, theta_out, sigma2):
    """Log-componentes por u ∈ {0,1}; retorna (posterior de u=1, log-verossimilhança)"""
    eta0 = z_sel @ theta_sel
    mu0 = z_out @ theta_out
    log_comp = []
    for u in (0.0, 1.0):
        lin = eta0 + alpha * u
        # log P(S|X,u) = s·lin − log(1+e^lin)
        log_sel = s * lin - np.logaddexp(0.0, lin)
        log_out = _normal_logpdf(y - mu0 - kappa * u, sigma2)
        log_comp.append(log_sel + log_out)
    log_mix = np.logaddexp(log_comp[0], log_comp[1])
    posterior = np.exp(log_comp[1] - log_mix)
    return posterior, float(np.sum(log_mix) + y.shape[0] * LOG_HALF)


def mixture_mle(
    subset: Dataset,
    alpha_fixed: float,
    kappa_fixed: float,
    init: Optional[MixtureMLEResult] = None,
    tol: float = EM_TOLERANCE,
    max_iter: int = EM_MAX_ITERATIONS,
) -> MixtureMLEResult:
    """
    EM para a mistura em U com (α̃, κ̃) fixos.

    Args:
        subset: Dataset restrito a um braço de tratamento
        alpha_fixed: Efeito de U na seleção do moderador
        kappa_fixed: Efeito de U no desfecho
        init: Solução anterior usada como ponto de partida (warm start)

    Returns:
        MixtureMLEResult; converged=False se max_iter for atingido

    Raises:
        DegenerateVarianceError: desfecho constante ou σ̂ degenerado
        SingleLevelModeratorError: moderador com um único nível no subconjunto
    """
    y = np.asarray(subset.y, dtype=np.float64)
    s = subset.s.astype(np.float64)
    n = subset.n
    level = subset.treatment_level
    if np.ptp(y) == 0.0:
        raise DegenerateVarianceError("degenerate outcome variance: desfecho constante no subconjunto")
    if np.all(s == s[0]):
        raise SingleLevelModeratorError(level if level is not None else -1)

    ones = np.ones((n, 1))
    z_sel = np.hstack([ones, subset.x])
    z_out = np.hstack([ones, s[:, None], subset.x])
    names = ("const", "s", *subset.covariate_names)
    check_rank(z_out, names)

    if init is not None:
        theta_sel = init.selection_coefficients.copy()
        theta_out = init.outcome_coefficients.copy()
        sigma2 = init.sigma ** 2
    else:
        # Ajustes ignorando U (pesos posteriores implícitos em 1/2)
        theta_sel = logistic_fit(z_sel, s).coefficients
        theta_out, _ = solve_least_squares(z_out, y)
        resid = y - z_out @ theta_out
        sigma2 = float(resid @ resid) / n

    # Dados empilhados do passo M da seleção: cópia u=0 e cópia u=1
    z_stack = np.vstack([z_sel, z_sel])
    s_stack = np.concatenate([s, s])
    offset_stack = np.concatenate([np.zeros(n), np.full(n, float(alpha_fixed))])
    floor = 1e-12 * float(np.var(y))

    trace = []
    monotone = True
    converged = False
    iterations = 0
    posterior, ll = _e_step(z_sel, z_out, y, s, alpha_fixed, kappa_fixed, theta_sel, theta_out, sigma2)
    trace.append(ll)
    for iterations in range(1, max_iter + 1):
        # --- M: seleção (logística ponderada com offset α̃u) ---
        weights = np.concatenate([1.0 - posterior, posterior])
        theta_sel = logistic_fit(z_stack, s_stack, weights=weights, offset=offset_stack, start=theta_sel).coefficients

        # --- M: desfecho (MQO de y − κ̃w; σ² ponderado pelas duas componentes) ---
        theta_out, _ = solve_least_squares(z_out, y - kappa_fixed * posterior)
        resid = y - z_out @ theta_out
        sigma2 = float(np.mean((1.0 - posterior) * resid ** 2 + posterior * (resid - kappa_fixed) ** 2))
        if not sigma2 > floor:
            raise DegenerateVarianceError(f"σ̂² degenerado ({sigma2:.3g}) no EM")

        # --- E ---
        posterior, ll_new = _e_step(z_sel, z_out, y, s, alpha_fixed, kappa_fixed, theta_sel, theta_out, sigma2)
        trace.append(ll_new)
        if ll_new < ll - MONOTONE_SLACK * max(1.0, abs(ll)):
            monotone = False
            logger.warning(f"⚠️ Log-verossimilhança do EM diminuiu na iteração {iterations}: {ll:.10g} -> {ll_new:.10g}")
        change = abs(ll_new - ll)
        ll = ll_new
        if change < tol:
            converged = True
            break

    if not converged:
        logger.warning(
            f"⚠️ EM não convergiu (T={level}, α̃={alpha_fixed:g}, κ̃={kappa_fixed:g}) após {max_iter} iterações"
        )

    return MixtureMLEResult(
        alpha=float(alpha_fixed),
        kappa=float(kappa_fixed),
        selection_coefficients=theta_sel,
        outcome_coefficients=theta_out,
        sigma=math.sqrt(sigma2),
        log_likelihood=ll,
        iterations=iterations,
        converged=converged,
        treatment_level=level,
        log_likelihood_trace=tuple(trace),
        monotone=monotone,
        covariate_names=subset.covariate_names,
    )
