"""
Mínimos quadrados via decomposição QR com variância clássica, HC1 ou por cluster
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.core.errors import DataValidationError, InsufficientDataError, RankDeficiencyError, UsageError
from src.core.models.results import VarianceMode

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class LinearFit:
    coefficients: np.ndarray
    covariance: np.ndarray
    residuals: np.ndarray
    fitted_values: np.ndarray
    design_column_names: Tuple[str, ...]
    variance_mode: VarianceMode
    n_clusters: Optional[int] = None

    @property
    def n_obs(self) -> int:
        return int(self.residuals.shape[0])

    @property
    def variance_defined(self) -> bool:
        return not bool(np.isnan(self.covariance).any())

    def _index(self, name: str) -> int:
        try:
            return self.design_column_names.index(name)
        except ValueError:
            raise KeyError(f"coluna '{name}' não está no desenho") from None

    def coef(self, name: str) -> float:
        return float(self.coefficients[self._index(name)])

    def var(self, name: str) -> float:
        j = self._index(name)
        return float(self.covariance[j, j])


def collinear_columns(design: np.ndarray, names: Sequence[str], tol: float = RANK_TOLERANCE) -> Tuple[str, ...]:
    """Colunas descartadas por QR com pivoteamento (as que completam o posto por último)"""
    _, r, piv = linalg.qr(design, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return tuple(names)
    rank = int(np.count_nonzero(diag > tol * diag[0]))
    return tuple(names[j] for j in piv[rank:])


def check_rank(design: np.ndarray, names: Sequence[str], tol: float = RANK_TOLERANCE) -> None:
    """Posto incompleto ⇔ menor valor singular < tol × maior"""
    sv = np.linalg.svd(design, compute_uv=False)
    if sv.size == 0:
        return
    if sv[0] == 0.0 or sv[-1] < tol * sv[0]:
        raise RankDeficiencyError(collinear_columns(design, names, tol) or tuple(names))


def solve_least_squares(design: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Coeficientes e fator R da QR econômica (sem checagem de posto)"""
    q, r = linalg.qr(design, mode="economic")
    coef = linalg.solve_triangular(r, q.T @ y)
    return coef, r


def least_squares_fit(
    design: np.ndarray,
    y: np.ndarray,
    mode: VarianceMode = VarianceMode.HETEROSKEDASTICITY_ROBUST,
    clusters: Optional[np.ndarray] = None,
    column_names: Optional[Sequence[str]] = None,
    rank_tol: float = RANK_TOLERANCE,
) -> LinearFit:
    """
    Ajuste de mínimos quadrados por QR (não pelas equações normais).

    Args:
        design: Matriz n×d
        y: Vetor de desfecho (n)
        mode: Classical, HeteroskedasticityRobust (HC1) ou ClusterRobust
        clusters: Rótulos de cluster (obrigatórios em ClusterRobust)
        column_names: Nomes das d colunas (para mensagens e acesso por nome)

    Returns:
        LinearFit com coeficientes, covariância simétrica e resíduos

    Raises:
        RankDeficiencyError: colunas colineares
        UsageError: ClusterRobust sem rótulos
        InsufficientDataError: n < d

    Com n = d o ajuste é exato: coeficientes válidos e covariância NaN
    (`variance_defined` False).
    """
    design = np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if design.ndim != 2 or design.shape[0] != y.shape[0]:
        raise DataValidationError(f"dimensões incompatíveis: desenho {design.shape}, y {y.shape}")
    n, d = design.shape
    names = tuple(column_names) if column_names is not None else tuple(f"x{j}" for j in range(d))
    if len(names) != d:
        raise DataValidationError("column_names deve ter uma entrada por coluna do desenho")
    if mode == VarianceMode.CLUSTER_ROBUST and clusters is None:
        raise UsageError("variância por cluster requer rótulos de cluster")
    if n < d:
        raise InsufficientDataError(f"n={n} observações para d={d} parâmetros")

    check_rank(design, names, rank_tol)
    coef, r = solve_least_squares(design, y)
    fitted = design @ coef
    resid = y - fitted

    r_inv = linalg.solve_triangular(r, np.eye(d))
    bread = r_inv @ r_inv.T

    n_clusters = None
    if n == d:
        logger.debug(f"🔍 Desenho exato (n=d={d}): variância indefinida")
        cov = np.full((d, d), np.nan)
    elif mode == VarianceMode.CLASSICAL:
        sigma2 = float(resid @ resid) / (n - d)
        cov = sigma2 * bread
    elif mode == VarianceMode.HETEROSKEDASTICITY_ROBUST:
        scores = design * resid[:, None]
        cov = (n / (n - d)) * (bread @ (scores.T @ scores) @ bread)
    else:
        codes = np.unique(np.asarray(clusters).astype(str), return_inverse=True)[1].reshape(-1)
        if codes.shape[0] != n:
            raise DataValidationError("rótulos de cluster com comprimento diferente de n")
        n_clusters = int(codes.max()) + 1
        if n_clusters < 2:
            raise InsufficientDataError("variância por cluster exige ao menos 2 clusters")
        summed = np.zeros((n_clusters, d))
        np.add.at(summed, codes, design * resid[:, None])
        factor = (n_clusters / (n_clusters - 1)) * ((n - 1) / (n - d))
        cov = factor * (bread @ (summed.T @ summed) @ bread)

    cov = 0.5 * (cov + cov.T)
    return LinearFit(
        coefficients=coef,
        covariance=cov,
        residuals=resid,
        fitted_values=fitted,
        design_column_names=names,
        variance_mode=VarianceMode(mode),
        n_clusters=n_clusters,
    )


def mean_variance(
    values: np.ndarray,
    mode: VarianceMode = VarianceMode.HETEROSKEDASTICITY_ROBUST,
    clusters: Optional[np.ndarray] = None,
) -> Tuple[float, float]:
    """Média e variância da média (regressão no intercepto; HC1 = s²/n)"""
    values = np.asarray(values, dtype=np.float64)
    fit = least_squares_fit(np.ones((values.shape[0], 1)), values, mode, clusters, ("const",))
    return fit.coef("const"), fit.var("const")
