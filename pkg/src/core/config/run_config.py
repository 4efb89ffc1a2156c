"""
Módulo para carregar e validar a configuração de uma execução da CLI

O arquivo JSON (`--config`) espelha as flags um-para-um; flags explícitas
sobrescrevem o arquivo.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.core.errors import UsageError
from src.core.models.results import Method, VarianceMode

logger = logging.getLogger(__name__)

COMMANDS = ("estimate", "simulate", "sensitivity", "diagnose")
DATA_COMMANDS = ("estimate", "sensitivity", "diagnose")
DEFAULT_SIMULATE_METHODS = ["parallel-regression", "controlled-interaction"]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Literal["estimate", "simulate", "sensitivity", "diagnose"]

    # --- Dados e papéis ---
    data: Optional[str] = None
    outcome: Optional[str] = None
    treatment: Optional[str] = None
    moderator: Optional[str] = None
    covariates: List[str] = Field(default_factory=list)
    cluster: Optional[str] = None
    by: Optional[str] = None
    drop_missing: bool = False

    # --- Estimação ---
    method: List[str] = Field(default_factory=list)
    variance_mode: Optional[VarianceMode] = None
    level: Optional[float] = Field(None, gt=0.0, lt=1.0)
    p_treat_known: Optional[float] = Field(None, gt=0.0, lt=1.0)
    no_trim: bool = False
    bootstrap_reps: Optional[int] = Field(None, ge=0)
    epsilon: Optional[float] = Field(None, gt=0.0, lt=0.5)

    # --- Simulação (parâmetros do DGP) ---
    dgp_config: Optional[str] = None
    intercept: Optional[float] = None
    tau: Optional[float] = None
    omega: Optional[float] = None
    beta: Optional[float] = None
    delta: Optional[float] = None
    xi: Optional[float] = None
    sigma: Optional[float] = None
    p_treat: Optional[float] = None
    sa: Optional[float] = None
    sb: Optional[float] = None
    n: Optional[int] = None
    noise_covariates: Optional[int] = None
    reps: int = Field(1000, ge=1)
    known_propensity: bool = False

    # --- Sensibilidade ---
    fraction: float = Field(0.5, gt=0.0, le=1.0)
    alpha_grid: Optional[Union[str, List[float]]] = None
    kappa_grid: Optional[Union[str, List[float]]] = None
    split: Literal["symmetric", "anchored"] = "symmetric"
    tolerance: Optional[float] = Field(None, gt=0.0)

    # --- Saída e execução ---
    out: Optional[str] = None
    format: Optional[Literal["json", "csv"]] = None
    seed: Optional[int] = Field(None, ge=0, lt=2**64)
    threads: Optional[int] = Field(None, ge=1)
    verbosity: int = 0

    @field_validator("method")
    @classmethod
    def validate_methods(cls, v: List[str]) -> List[str]:
        if v == ["all"]:
            return [m.slug for m in Method]
        for slug in v:
            try:
                Method.from_slug(slug)
            except ValueError:
                valid = ", ".join(m.slug for m in Method)
                raise ValueError(f"método desconhecido '{slug}' (válidos: {valid}, all)") from None
        if len(set(v)) != len(v):
            raise ValueError("método repetido na lista")
        return v

    @model_validator(mode="after")
    def validate_command(self) -> "RunConfig":
        if self.command in DATA_COMMANDS:
            missing = [f for f in ("data", "outcome", "treatment", "moderator") if getattr(self, f) is None]
            if missing:
                raise ValueError(f"'{self.command}' exige: {', '.join('--' + m for m in missing)}")
        if self.command == "simulate" and (self.data is not None or self.by is not None):
            raise ValueError("'simulate' não lê dados (--data/--by não se aplicam)")
        if self.variance_mode == VarianceMode.CLUSTER_ROBUST and self.cluster is None:
            raise ValueError("--variance-mode ClusterRobust exige --cluster")
        if self.by is not None and self.by in self.role_columns():
            raise ValueError(f"--by '{self.by}' já está atribuída a outro papel")
        return self

    def role_columns(self) -> List[str]:
        cols = [c for c in (self.outcome, self.treatment, self.moderator) if c is not None]
        cols += list(self.covariates)
        if self.cluster is not None:
            cols.append(self.cluster)
        return cols

    def methods(self) -> List[Method]:
        slugs = self.method or (DEFAULT_SIMULATE_METHODS if self.command == "simulate" else ["parallel-regression"])
        return [Method.from_slug(s) for s in slugs]

    def resolved_seed(self, fallback: int = 0) -> int:
        return fallback if self.seed is None else self.seed

    def output_format(self) -> str:
        """Formato explícito ou inferido pela extensão do arquivo de saída"""
        if self.format is not None:
            return self.format
        if self.out is not None and Path(self.out).suffix.lower() == ".csv":
            return "csv"
        return "json"

    # ==========================================================================
    # FONTES
    # ==========================================================================
    @classmethod
    def from_sources(cls, file_values: Optional[Dict[str, Any]], flag_values: Dict[str, Any]) -> "RunConfig":
        """
        Combina o arquivo de configuração com as flags (flags vencem).

        Raises:
            UsageError: campos inválidos, desconhecidos ou ausentes
        """
        merged: Dict[str, Any] = dict(file_values or {})
        merged.update({k: v for k, v in flag_values.items() if v is not None})
        try:
            return cls(**merged)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
            )
            raise UsageError(f"configuração inválida: {problems}") from e


def load_config_file(config_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Carrega o arquivo JSON de configuração de execução

    Raises:
        UsageError: arquivo ausente, ilegível ou que não seja um objeto JSON
    """
    path = Path(config_path)
    if not path.exists():
        raise UsageError(f"Arquivo de configuração não encontrado: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            values = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"Arquivo de configuração ilegível ({path}): {e}") from e
    if not isinstance(values, dict):
        raise UsageError(f"Arquivo de configuração deve conter um objeto JSON: {path}")
    logger.info(f"📋 Usando configuração: {path}")
    return values
