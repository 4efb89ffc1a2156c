"""
Regressão logística por Newton-Raphson / IRLS

Aceita pesos por caso, offset e vetor inicial (usados pelo passo M do EM
e pelos warm starts da análise de sensibilidade).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import expit

from src.core.errors import DataValidationError, InsufficientDataError, SeparationError

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8
MAX_ITERATIONS = 100
PROBABILITY_FLOOR = 1e-12
MAX_STEP_HALVINGS = 30
# Quase-separação: ‖β‖ cresce em DIVERGENCE_WINDOW passos seguidos, sem que os passos encolham
DIVERGENCE_WINDOW = 8
DIVERGENCE_STEP_RATIO = 0.5
DIVERGENCE_MIN_GROWTH = 5.0


@dataclass(frozen=True, eq=False)
class LogisticFit:
    coefficients: np.ndarray
    converged: bool
    iterations: int
    gradient_norm: float
    log_likelihood: float
    column_names: Tuple[str, ...] = ()

    def linear_predictor(self, x: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(x, dtype=np.float64)) @ self.coefficients

    def predict(self, x: np.ndarray) -> np.ndarray:
        """P(S=1 | x) estritamente dentro de (0, 1); x já inclui o intercepto"""
        p = expit(self.linear_predictor(x))
        return np.clip(p, PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.column_names.index(name)])


def bernoulli_log_likelihood(eta: np.ndarray, s: np.ndarray, weights: Optional[np.ndarray] = None) -> float:
    """Σ w·[s·η − log(1 + e^η)] calculado de forma estável"""
    terms = s * eta - np.logaddexp(0.0, eta)
    if weights is not None:
        terms = weights * terms
    return float(np.sum(terms))


def _separates(eta: np.ndarray, s: np.ndarray) -> bool:
    return bool(np.all(np.where(s == 1, eta > 0.0, eta < 0.0)))


def _diverging(norms: Sequence[float], steps: Sequence[float]) -> bool:
    """
    Coeficientes fugindo para o infinito: nas últimas DIVERGENCE_WINDOW iterações
    ‖β‖ aumentou sempre, os passos de Newton não decaíram e o crescimento total
    passou de DIVERGENCE_MIN_GROWTH.
    """
    if len(steps) < DIVERGENCE_WINDOW:
        return False
    window = np.asarray(norms[-(DIVERGENCE_WINDOW + 1):])
    recent = np.asarray(steps[-DIVERGENCE_WINDOW:])
    return bool(
        np.all(np.diff(window) > 0.0)
        and recent[-1] >= DIVERGENCE_STEP_RATIO * recent[0]
        and window[-1] - window[0] >= DIVERGENCE_MIN_GROWTH
    )


def logistic_fit(
    x: np.ndarray,
    s: np.ndarray,
    weights: Optional[np.ndarray] = None,
    offset: Optional[np.ndarray] = None,
    start: Optional[np.ndarray] = None,
    tol: float = GRADIENT_TOLERANCE,
    max_iter: int = MAX_ITERATIONS,
    column_names: Optional[Sequence[str]] = None,
) -> LogisticFit:
    """
    Máxima verossimilhança de Bernoulli com ligação logit.

    Args:
        x: Matriz n×d com o intercepto já na primeira coluna
        s: Vetor binário (0/1)
        weights: Pesos por caso (opcional)
        offset: Termo fixo somado ao preditor linear (opcional)
        start: Coeficientes iniciais (warm start)
        tol: Tolerância na norma do gradiente médio
        max_iter: Máximo de iterações de Newton

    Returns:
        LogisticFit; converged=False quando max_iter é atingido

    Raises:
        SeparationError: separação perfeita ou quase-separação (carrega o ajuste parcial)
    """
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    n, d = x.shape
    if s.shape[0] != n:
        raise DataValidationError(f"x tem {n} linhas e s tem {s.shape[0]}")
    if n <= d:
        raise InsufficientDataError(f"regressão logística com n={n} e {d} parâmetros")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    off = np.zeros(n) if offset is None else np.asarray(offset, dtype=np.float64).reshape(-1)
    if not (np.any((s == 1) & (w > 0)) and np.any((s == 0) & (w > 0))):
        raise DataValidationError("regressão logística exige as duas classes presentes")
    check_separation = weights is None and offset is None
    names = tuple(column_names) if column_names is not None else ()
    total_weight = float(w.sum())

    beta = np.zeros(d) if start is None else np.asarray(start, dtype=np.float64).copy()

    def partial(it: int, grad_norm: float) -> LogisticFit:
        eta = x @ beta + off
        return LogisticFit(beta.copy(), False, it, grad_norm, bernoulli_log_likelihood(eta, s, w), names)

    ll = bernoulli_log_likelihood(x @ beta + off, s, w)
    grad_norm = np.inf
    norms = [float(np.linalg.norm(beta))]
    steps = []
    for iteration in range(max_iter + 1):
        eta = x @ beta + off
        if check_separation and _separates(eta, s):
            raise SeparationError("separação perfeita: o preditor classifica todas as linhas", partial(iteration, grad_norm))

        p = expit(eta)
        grad = x.T @ (w * (s - p))
        grad_norm = float(np.linalg.norm(grad)) / total_weight
        if grad_norm < tol:
            return LogisticFit(beta.copy(), True, iteration, grad_norm, ll, names)
        if iteration == max_iter:
            break

        hess = x.T @ (x * (w * p * (1.0 - p))[:, None])
        try:
            step = linalg.solve(hess, grad, assume_a="pos")
        except (linalg.LinAlgError, ValueError) as e:
            raise SeparationError(f"hessiana singular no passo de Newton ({e})", partial(iteration, grad_norm)) from e

        # Busca em linha por bissecção do passo: a verossimilhança nunca diminui
        scale = 1.0
        for _ in range(MAX_STEP_HALVINGS):
            candidate = beta + scale * step
            ll_new = bernoulli_log_likelihood(x @ candidate + off, s, w)
            if ll_new >= ll - 1e-12 * max(1.0, abs(ll)):
                break
            scale *= 0.5
        steps.append(float(np.linalg.norm(candidate - beta)))
        beta, ll = candidate, ll_new
        norms.append(float(np.linalg.norm(beta)))
        if _diverging(norms, steps):
            raise SeparationError(
                f"quase-separação: ‖β‖ cresceu {norms[-1] - norms[-1 - DIVERGENCE_WINDOW]:.3g} "
                f"em {DIVERGENCE_WINDOW} iterações sem convergir",
                partial(iteration + 1, grad_norm),
            )

    logger.warning(f"⚠️ Regressão logística não convergiu em {max_iter} iterações (|grad|={grad_norm:.3g})")
    return LogisticFit(beta.copy(), False, max_iter, grad_norm, ll, names)
