"""
Opções e utilitários compartilhados pelos estimadores
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np

from src.core.config import get_settings
from src.core.errors import (
    DegenerateVarianceError,
    EmptyCellError,
    ModerationError,
    SingleLevelModeratorError,
    UsageError,
)
from src.core.models.dataset import Dataset
from src.core.models.results import VarianceMode

logger = logging.getLogger(__name__)


# ==============================================================================
# ESPECIFICAÇÕES DE PROPENSÃO
# ==============================================================================
@dataclass(frozen=True)
class KnownP:
    """Probabilidade de tratamento conhecida pelo desenho"""

    value: float

    def __post_init__(self):
        if not 0.0 < self.value < 1.0:
            raise UsageError(f"p conhecido deve estar em (0, 1): {self.value}")


@dataclass(frozen=True)
class EstimateP:
    """p = média amostral de T"""


@dataclass(frozen=True)
class KnownPi:
    """π(X) conhecido; recebe a matriz n×k de covariáveis e devolve n probabilidades"""

    function: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LogisticPi:
    """π̂(X) por regressão logística S ~ 1 + X"""


PSpec = Union[KnownP, EstimateP]
PiSpec = Union[KnownPi, LogisticPi]


@dataclass(frozen=True)
class EstimatorOptions:
    """
    Opções uniformes de todos os estimadores do registro.

    Campos None usam o padrão do Settings (nível de confiança, trimming,
    réplicas de bootstrap) ou do Dataset (modo de variância).
    """

    variance_mode: Optional[VarianceMode] = None
    level: Optional[float] = None
    p_spec: PSpec = field(default_factory=EstimateP)
    pi_spec: PiSpec = field(default_factory=LogisticPi)
    trim: bool = True
    trim_bounds: Optional[Tuple[float, float]] = None
    bootstrap_reps: Optional[int] = None
    seed: int = 0

    def resolve_level(self) -> float:
        return get_settings().CONFIDENCE_LEVEL if self.level is None else float(self.level)

    def resolve_trim_bounds(self) -> Tuple[float, float]:
        return get_settings().propensity_trim if self.trim_bounds is None else tuple(self.trim_bounds)

    def resolve_bootstrap_reps(self) -> int:
        return get_settings().BOOTSTRAP_REPS if self.bootstrap_reps is None else int(self.bootstrap_reps)

    def resolve_mode(self, ds: Dataset) -> VarianceMode:
        """Padrão: ClusterRobust quando há rótulos de cluster, senão HC1"""
        if self.variance_mode is None:
            return VarianceMode.CLUSTER_ROBUST if ds.has_clusters else VarianceMode.HETEROSKEDASTICITY_ROBUST
        if self.variance_mode == VarianceMode.CLUSTER_ROBUST and not ds.has_clusters:
            raise UsageError("variância por cluster requer rótulos de cluster")
        return VarianceMode(self.variance_mode)


DEFAULT_OPTIONS = EstimatorOptions()


# ==============================================================================
# PRÉ-CONDIÇÕES
# ==============================================================================
def require_cells(ds: Dataset) -> None:
    empty = [cell for cell, count in ds.cell_counts().items() if count == 0]
    if empty:
        raise EmptyCellError(empty)


def require_both_moderator_levels(subset: Dataset, level: int) -> None:
    if subset.n == 0 or np.all(subset.s == subset.s[0]):
        raise SingleLevelModeratorError(level)


def subset_clusters(subset: Dataset, mode: VarianceMode) -> Optional[np.ndarray]:
    return subset.cluster if mode == VarianceMode.CLUSTER_ROBUST else None


# ==============================================================================
# BOOTSTRAP
# ==============================================================================
def resample_indices(ds: Dataset, rng: np.random.Generator) -> np.ndarray:
    """Reamostra clusters inteiros quando há rótulos, senão linhas"""
    if ds.has_clusters:
        codes = np.unique(ds.cluster.astype(str), return_inverse=True)[1].reshape(-1)
        members = [np.flatnonzero(codes == g) for g in range(int(codes.max()) + 1)]
        drawn = rng.integers(0, len(members), size=len(members))
        return np.concatenate([members[g] for g in drawn])
    return rng.integers(0, ds.n, size=ds.n)


def bootstrap_variance(
    ds: Dataset,
    statistic: Callable[[Dataset], float],
    reps: int,
    seed: Union[int, np.random.SeedSequence],
) -> Tuple[float, int, int]:
    """
    Variância bootstrap de uma estatística escalar.

    Réplicas em que a estatística falha (célula vazia, separação...) são
    descartadas e contadas.

    Returns:
        (variância, réplicas válidas, réplicas descartadas)
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    values = []
    failed = 0
    for _ in range(reps):
        try:
            values.append(statistic(ds.take(resample_indices(ds, rng))))
        except ModerationError:
            failed += 1
    if len(values) < 2:
        raise DegenerateVarianceError(f"bootstrap com {len(values)} réplica(s) válida(s) de {reps}")
    if failed:
        logger.warning(f"⚠️ Bootstrap: {failed} de {reps} réplica(s) descartada(s)")
    return float(np.var(values, ddof=1)), len(values), failed
