"""
Pareamento por vizinho mais próximo na distância de Mahalanobis (com reposição)
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from src.core.errors import MatchingError, UsageError

logger = logging.getLogger(__name__)

RIDGE_START = 1e-8
RIDGE_GROWTH = 10.0
RIDGE_MAX_STEPS = 20
CONDITION_TOLERANCE = 1e-12
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class MatchSet:
    """
    Pares (alvo, controle, distância).

    Índices são posições nas linhas de `features` passadas ao pareamento;
    alvos pertencem ao grupo 1 e controles ao grupo 0.
    """

    target_indices: np.ndarray
    matched_indices: np.ndarray
    distances: np.ndarray
    multiplicities: Dict[int, int]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def pairs(self) -> Tuple[Tuple[int, int, float], ...]:
        return tuple(
            (int(t), int(m), float(d))
            for t, m, d in zip(self.target_indices, self.matched_indices, self.distances)
        )

    def control_weights(self, control_indices: np.ndarray) -> np.ndarray:
        """Multiplicidade K de cada controle (0 se nunca usado), na ordem dada"""
        return np.array([self.multiplicities.get(int(j), 0) for j in control_indices], dtype=np.float64)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pairs": [{"target": t, "matched": m, "distance": d} for t, m, d in self.pairs],
            "multiplicities": {str(k): v for k, v in sorted(self.multiplicities.items())},
            "metric": self.metadata.get("metric"),
            "ridge": self.metadata.get("ridge"),
        }


def _is_well_conditioned(cov: np.ndarray) -> bool:
    eig = np.linalg.eigvalsh(cov)
    return eig[0] > CONDITION_TOLERANCE * max(eig[-1], 0.0) and eig[-1] > 0.0


def inverse_pooled_covariance(features: np.ndarray) -> Tuple[np.ndarray, float, str]:
    """
    Inversa da covariância amostral conjunta das features.

    Returns:
        (VI, ridge aplicado, métrica) - métrica 'identity' quando nenhuma feature varia
    """
    k = features.shape[1]
    cov = np.atleast_2d(np.cov(features, rowvar=False, ddof=1))
    diag = np.diag(cov)
    if not np.any(diag > 0.0):
        logger.warning("⚠️ Nenhuma covariável varia: usando métrica identidade no pareamento")
        return np.eye(k), 0.0, "identity"

    if _is_well_conditioned(cov):
        return np.linalg.inv(cov), 0.0, "mahalanobis"

    ridge = RIDGE_START * float(np.mean(diag))
    for _ in range(RIDGE_MAX_STEPS):
        ridged = cov + ridge * np.eye(k)
        if _is_well_conditioned(ridged):
            logger.warning(f"⚠️ Covariância singular no pareamento: ridge {ridge:.3g} adicionado à diagonal")
            return np.linalg.inv(ridged), ridge, "mahalanobis"
        ridge *= RIDGE_GROWTH
    raise MatchingError("não foi possível regularizar a covariância conjunta das covariáveis")


def mahalanobis_match(features: np.ndarray, group: np.ndarray, with_replacement: bool = True) -> MatchSet:
    """
    Pareia cada unidade do grupo 1 ("moderada") ao controle mais próximo do grupo 0.

    Empates são resolvidos pelo menor índice de linha.

    Raises:
        UsageError: with_replacement=False (modo não suportado)
        MatchingError: menos de 2 linhas ou grupo vazio
    """
    if not with_replacement:
        raise UsageError("apenas pareamento com reposição é suportado")
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    group = np.asarray(group).reshape(-1)
    n = features.shape[0]
    if n < 2:
        raise MatchingError("pareamento exige ao menos 2 linhas")
    if features.shape[1] == 0:
        raise MatchingError("pareamento exige ao menos uma covariável")
    targets = np.flatnonzero(group == 1)
    controls = np.flatnonzero(group == 0)
    if targets.size == 0 or controls.size == 0:
        raise MatchingError("pareamento exige os dois grupos não vazios")

    vi, ridge, metric = inverse_pooled_covariance(features)
    if metric == "identity":
        dist = cdist(features[targets], features[controls], metric="euclidean")
    else:
        dist = cdist(features[targets], features[controls], metric="mahalanobis", VI=vi)

    best = dist.min(axis=1, keepdims=True)
    # primeiro controle (menor índice) dentro da tolerância de empate
    chosen = np.argmax(dist <= best * (1.0 + TIE_TOLERANCE), axis=1)
    matched = controls[chosen]
    distances = dist[np.arange(targets.size), chosen]

    uniq, counts = np.unique(matched, return_counts=True)
    multiplicities = {int(j): int(c) for j, c in zip(uniq, counts)}
    logger.debug(
        f"🔍 Pareamento: {targets.size} alvos, {len(multiplicities)} controles distintos, ridge={ridge:g}"
    )
    return MatchSet(
        target_indices=targets,
        matched_indices=matched,
        distances=distances,
        multiplicities=multiplicities,
        metadata={"metric": metric, "ridge": ridge, "inverse_covariance": vi},
    )
