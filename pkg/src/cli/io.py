"""
Entrada CSV e saída de relatórios (JSON / CSV)
"""

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src import __version__
from src.core.errors import CsvParseError, DataValidationError, MissingColumnError, UsageError
from src.core.models.dataset import Dataset, Roles, bind_dataset

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
GRID_TOLERANCE = 1e-12


# ==============================================================================
# LEITURA
# ==============================================================================
def _load_frame(path: Union[str, Path]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, sep=",", dtype=str, keep_default_na=False, encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DataValidationError(f"não foi possível ler {path}: {e}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataValidationError(f"CSV malformado em {path}: {e}") from e
    frame.columns = [c.strip() for c in frame.columns]
    return frame


def _numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    """Converte uma coluna; célula vazia vira ausente, texto inválido é erro com (linha, coluna)"""
    raw = frame[column].str.strip()
    values = pd.to_numeric(raw.where(raw != ""), errors="coerce")
    invalid = values.isna() & (raw != "") & (raw.str.lower() != "nan")
    if invalid.any():
        pos = int(np.flatnonzero(invalid.to_numpy())[0])
        # linha 1 é o cabeçalho
        raise CsvParseError(row=pos + 2, column=column, raw=raw.iloc[pos])
    return values.to_numpy(dtype=np.float64)


def _label_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    raw = frame[column].str.strip()
    return raw.where(raw != "", None).to_numpy(dtype=object)


def _frame_columns(frame: pd.DataFrame, roles: Roles) -> Dict[str, np.ndarray]:
    for name in roles.required_columns():
        if name not in frame.columns:
            raise MissingColumnError(name)
    columns = {name: _numeric_column(frame, name) for name in (roles.outcome, roles.treatment, roles.moderator)}
    columns.update({name: _numeric_column(frame, name) for name in roles.covariates})
    if roles.cluster is not None:
        columns[roles.cluster] = _label_column(frame, roles.cluster)
    return columns


def read_csv(path: Union[str, Path], roles: Roles, drop_missing: bool = False) -> Dataset:
    """
    Lê um CSV UTF-8 (cabeçalho na primeira linha, separador vírgula, decimal '.').

    Raises:
        MissingColumnError: coluna de papel ausente no cabeçalho
        CsvParseError: célula não numérica (linha e coluna do arquivo)
    """
    frame = _load_frame(path)
    ds = bind_dataset(_frame_columns(frame, roles), roles, drop_missing=drop_missing)
    logger.info(f"📋 {path}: {ds.n} linha(s) lidas, {ds.dropped_rows} descartada(s)")
    return ds


def read_grouped_csv(
    path: Union[str, Path], roles: Roles, by: str, drop_missing: bool = False
) -> List[Tuple[str, Dataset]]:
    """Um Dataset por valor da coluna `by` (ordem alfabética dos valores)"""
    frame = _load_frame(path)
    if by not in frame.columns:
        raise MissingColumnError(by)
    groups = []
    for value in sorted(frame[by].str.strip().unique()):
        part = frame[frame[by].str.strip() == value].reset_index(drop=True)
        ds = bind_dataset(_frame_columns(part, roles), roles, drop_missing=drop_missing)
        logger.info(f"📋 Grupo {by}={value}: {ds.n} linha(s)")
        groups.append((value, ds))
    return groups


def parse_grid(text: Union[str, Sequence[float]]) -> List[float]:
    """
    `start:stop:step` (stop inclusivo) ou lista separada por vírgulas

    Raises:
        UsageError: sintaxe inválida ou passo nulo/de sinal errado
    """
    if not isinstance(text, str):
        return [float(v) for v in text]
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step == 0.0 or (stop - start) * step < 0.0:
                raise UsageError(f"grade '{text}': passo nulo ou na direção errada")
            count = int(math.floor((stop - start) / step + GRID_TOLERANCE)) + 1
            return [start + i * step for i in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise UsageError(f"grade inválida '{text}' (use start:stop:step ou a,b,c)") from e


# ==============================================================================
# ESCRITA
# ==============================================================================
def to_plain(value: Any) -> Any:
    """Tipos numpy -> Python; NaN/infinito -> None (JSON estrito)"""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def stamp(payload: Dict[str, Any], seed: Optional[int]) -> Dict[str, Any]:
    return {**payload, "tool_version": __version__, "seed": seed}


def write_report(
    payload: Dict[str, Any],
    rows: Optional[List[Dict[str, Any]]],
    path: Optional[Union[str, Path]],
    fmt: str = "json",
    columns: Optional[Sequence[str]] = None,
) -> None:
    """
    Grava um relatório.

    Args:
        payload: Objeto JSON (já com tool_version e seed)
        rows: Linhas planas para o formato CSV
        path: Destino (None = stdout)
        fmt: 'json' ou 'csv'
        columns: Ordem/cabeçalho exato das colunas CSV

    JSON usa a representação mais curta que reproduz cada float; CSV usa 17
    dígitos significativos.
    """
    if fmt == "json":
        text = json.dumps(to_plain(payload), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    elif fmt == "csv":
        if rows is None:
            raise UsageError("este relatório não tem formato CSV")
        frame = pd.DataFrame(rows, columns=list(columns) if columns is not None else None)
        text = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    else:
        raise UsageError(f"formato desconhecido: {fmt}")

    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise DataValidationError(f"não foi possível gravar {path}: {e}") from e
    logger.info(f"✅ Relatório gravado em {path}")
