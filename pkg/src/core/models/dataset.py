"""
Modelo de dados tabular: Dataset, papéis de coluna e validação

Centraliza as pré-condições de identificação verificáveis nos dados:
tratamento e moderador estritamente binários, ausência de valores
faltantes/não finitos e presença dos dois níveis de cada um.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.errors import (
    DataValidationError,
    EmptyArmError,
    LengthMismatchError,
    MissingColumnError,
    MissingValueError,
    NonBinaryColumnError,
    UsageError,
)

logger = logging.getLogger(__name__)

CELL_KEYS = ("T1S1", "T0S1", "T1S0", "T0S0")


@dataclass(frozen=True)
class Roles:
    """Mapeamento de papéis -> nomes de coluna"""

    outcome: str
    treatment: str
    moderator: str
    covariates: Tuple[str, ...] = ()
    cluster: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))
        named = [self.outcome, self.treatment, self.moderator, *self.covariates]
        if self.cluster is not None:
            named.append(self.cluster)
        duplicated = sorted({c for c in named if named.count(c) > 1})
        if duplicated:
            raise UsageError(f"coluna(s) atribuída(s) a mais de um papel: {', '.join(duplicated)}")

    def required_columns(self) -> Tuple[str, ...]:
        cols = (self.outcome, self.treatment, self.moderator, *self.covariates)
        return cols + ((self.cluster,) if self.cluster is not None else ())


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Dados validados: Y, T, S, X e rótulos de cluster opcionais.

    Imutável após a construção (arrays marcados como somente leitura).
    Subconjuntos produzidos por `split_by_treatment`/`take` preservam
    `row_ids`, os índices das linhas no dado original.
    """

    y: np.ndarray
    t: np.ndarray
    s: np.ndarray
    x: np.ndarray
    covariate_names: Tuple[str, ...]
    row_ids: np.ndarray
    cluster: Optional[np.ndarray] = None
    roles: Optional[Roles] = None
    dropped_rows: int = 0

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def k(self) -> int:
        return int(self.x.shape[1])

    @property
    def has_clusters(self) -> bool:
        return self.cluster is not None

    @property
    def treatment_level(self) -> Optional[int]:
        """Nível único de T quando o dataset é restrito a um braço"""
        levels = np.unique(self.t)
        return int(levels[0]) if levels.size == 1 else None

    def cell_counts(self) -> Dict[str, int]:
        counts = {}
        for key in CELL_KEYS:
            t_val, s_val = int(key[1]), int(key[3])
            counts[key] = int(np.count_nonzero((self.t == t_val) & (self.s == s_val)))
        return counts

    def take(self, indices: Iterable[int]) -> "Dataset":
        """Subconjunto (ou reamostra) por posição, sem revalidar braços"""
        idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices, dtype=np.intp)
        return Dataset(
            y=_readonly(self.y[idx].copy()),
            t=_readonly(self.t[idx].copy()),
            s=_readonly(self.s[idx].copy()),
            x=_readonly(self.x[idx].copy()),
            covariate_names=self.covariate_names,
            row_ids=_readonly(self.row_ids[idx].copy()),
            cluster=None if self.cluster is None else _readonly(self.cluster[idx].copy()),
            roles=self.roles,
            dropped_rows=self.dropped_rows,
        )

    def with_labels(self, t: Optional[np.ndarray] = None, s: Optional[np.ndarray] = None,
                    cluster: Optional[np.ndarray] = None) -> "Dataset":
        """Cópia com T, S ou clusters substituídos (mesmas dimensões)"""
        return Dataset(
            y=self.y,
            t=self.t if t is None else _readonly(np.asarray(t, dtype=np.int64).copy()),
            s=self.s if s is None else _readonly(np.asarray(s, dtype=np.int64).copy()),
            x=self.x,
            covariate_names=self.covariate_names,
            row_ids=self.row_ids,
            cluster=self.cluster if cluster is None else _readonly(np.asarray(cluster).copy()),
            roles=self.roles,
            dropped_rows=self.dropped_rows,
        )

    def to_columns(self) -> Dict[str, np.ndarray]:
        """Exporta as colunas com os nomes originais dos papéis"""
        roles = self.roles or Roles("y", "t", "s", self.covariate_names)
        columns = {
            roles.outcome: self.y.copy(),
            roles.treatment: self.t.copy(),
            roles.moderator: self.s.copy(),
        }
        for j, name in enumerate(self.covariate_names):
            columns[name] = self.x[:, j].copy()
        if self.cluster is not None and roles.cluster is not None:
            columns[roles.cluster] = self.cluster.copy()
        return columns


# ==============================================================================
# BINDING / VALIDAÇÃO
# ==============================================================================
def _as_float(role: str, name: str, values: Any) -> np.ndarray:
    try:
        return np.asarray(values, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError) as e:
        raise DataValidationError(f"{role}: coluna '{name}' não é numérica ({e})") from e


def _label_missing(labels: np.ndarray) -> np.ndarray:
    return pd.isna(labels) | (labels.astype(str) == "")


def _coerce_binary(role: str, name: str, values: np.ndarray) -> np.ndarray:
    bad = ~((values == 0.0) | (values == 1.0))
    if bad.any():
        raise NonBinaryColumnError(role, name, values[np.flatnonzero(bad)[0]].item())
    return values.astype(np.int64)


def bind_dataset(columns: Mapping[str, Sequence[Any]], roles: Roles, drop_missing: bool = False) -> Dataset:
    """
    Vincula colunas em memória a papéis e valida o resultado.

    Args:
        columns: Colunas nomeadas (reais ou rótulos)
        roles: Papéis (um desfecho, um tratamento, um moderador, covariáveis, cluster)
        drop_missing: Se True, descarta linhas com valores ausentes em qualquer coluna de papel

    Returns:
        Dataset validado

    Raises:
        MissingColumnError, LengthMismatchError, MissingValueError,
        NonBinaryColumnError, EmptyArmError
    """
    for name in roles.required_columns():
        if name not in columns:
            raise MissingColumnError(name)

    lengths = {name: len(columns[name]) for name in roles.required_columns()}
    if len(set(lengths.values())) > 1:
        detail = ", ".join(f"{k}={v}" for k, v in lengths.items())
        raise LengthMismatchError(f"colunas com comprimentos diferentes: {detail}")
    n_raw = next(iter(lengths.values()))

    numeric = {
        "outcome": (roles.outcome, _as_float("outcome", roles.outcome, columns[roles.outcome])),
        "treatment": (roles.treatment, _as_float("treatment", roles.treatment, columns[roles.treatment])),
        "moderator": (roles.moderator, _as_float("moderator", roles.moderator, columns[roles.moderator])),
    }
    covs = [(name, _as_float("covariate", name, columns[name])) for name in roles.covariates]
    labels = None
    if roles.cluster is not None:
        labels = np.asarray(columns[roles.cluster], dtype=object).reshape(-1)

    missing_masks = [(role, name, ~np.isfinite(v)) for role, (name, v) in numeric.items()]
    missing_masks += [("covariate", name, ~np.isfinite(v)) for name, v in covs]
    if labels is not None:
        missing_masks.append(("cluster", roles.cluster, _label_missing(labels)))

    keep = np.ones(n_raw, dtype=bool)
    for role, name, mask in missing_masks:
        if mask.any():
            if not drop_missing:
                raise MissingValueError(role, name, int(mask.sum()))
            keep &= ~mask
    dropped = int(n_raw - keep.sum())
    if dropped:
        logger.warning(f"⚠️ {dropped} linha(s) descartada(s) por valores ausentes")

    y = numeric["outcome"][1][keep]
    t = _coerce_binary("treatment", roles.treatment, numeric["treatment"][1][keep])
    s = _coerce_binary("moderator", roles.moderator, numeric["moderator"][1][keep])
    for role, arr in (("treatment", t), ("moderator", s)):
        for level in (0, 1):
            if not np.any(arr == level):
                raise EmptyArmError(role, level)

    x = np.column_stack([v[keep] for _, v in covs]) if covs else np.empty((y.shape[0], 0))
    ds = Dataset(
        y=_readonly(y.copy()),
        t=_readonly(t),
        s=_readonly(s),
        x=_readonly(np.ascontiguousarray(x, dtype=np.float64)),
        covariate_names=tuple(roles.covariates),
        row_ids=_readonly(np.flatnonzero(keep)),
        cluster=None if labels is None else _readonly(labels[keep].copy()),
        roles=roles,
        dropped_rows=dropped,
    )
    logger.debug(f"✅ Dataset vinculado: n={ds.n}, k={ds.k}, células={ds.cell_counts()}")
    return ds


def split_by_treatment(ds: Dataset) -> Tuple[Dataset, Dataset]:
    """
    Particiona as linhas pelo nível do TRATAMENTO (nunca pelo moderador).

    Returns:
        (subconjunto T=0, subconjunto T=1), ordem original preservada
    """
    return ds.take(np.flatnonzero(ds.t == 0)), ds.take(np.flatnonzero(ds.t == 1))
