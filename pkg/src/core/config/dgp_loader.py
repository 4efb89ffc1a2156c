"""
Leitura e escrita de DgpConfig em texto simples (`chave = valor`) ou JSON

Formato texto, uma chave por linha (`#` inicia comentário):

    delta = 2
    xi = 1.5
    s_model = 0, 1
    x_model = discrete
    x_levels = 0, 1
    x_probs = 0.3, 0.7
    confounder = 2.0, -0.5, 0.5      # alpha, kappa0, kappa1
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from pydantic import ValidationError

from src.core.errors import UsageError
from src.core.models.dgp import DgpConfig, DiscreteX, UniformX

logger = logging.getLogger(__name__)

SCALAR_KEYS = {
    "alpha": float,
    "tau": float,
    "omega": float,
    "beta": float,
    "delta": float,
    "xi": float,
    "sigma_eps": float,
    "p_treat": float,
    "n": int,
    "seed": int,
    "noise_covariates": int,
}
LIST_KEYS = ("s_model", "x_levels", "x_probs", "confounder")
TEXT_KEYS = ("x_model",)
X_BOUND_KEYS = ("x_lo", "x_hi")


def _floats(raw: str) -> List[float]:
    return [float(part) for part in raw.split(",") if part.strip()]


def _parse_lines(text: str, source: str) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise UsageError(f"{source}:{lineno}: esperado 'chave = valor'")
        key, raw = (part.strip() for part in content.split("=", 1))
        if key in values:
            raise UsageError(f"{source}:{lineno}: chave repetida '{key}'")
        try:
            if key in SCALAR_KEYS:
                values[key] = SCALAR_KEYS[key](raw)
            elif key in LIST_KEYS:
                values[key] = _floats(raw)
            elif key in X_BOUND_KEYS:
                values[key] = float(raw)
            elif key in TEXT_KEYS:
                values[key] = raw.lower()
            else:
                raise UsageError(f"{source}:{lineno}: chave desconhecida '{key}'")
        except ValueError as e:
            raise UsageError(f"{source}:{lineno}: valor inválido para '{key}': {raw}") from e
    return values


def _assemble(values: Dict[str, Any]) -> Dict[str, Any]:
    """Converte as chaves planas do formato texto na estrutura do DgpConfig"""
    fields = {k: v for k, v in values.items() if k in SCALAR_KEYS}
    if "s_model" in values:
        fields["s_model"] = tuple(values["s_model"])
    kind = values.get("x_model", "standard_normal")
    if kind == "uniform":
        fields["x_model"] = {"kind": "uniform", "lo": values.get("x_lo", 0.0), "hi": values.get("x_hi", 1.0)}
    elif kind == "discrete":
        fields["x_model"] = {
            "kind": "discrete",
            "levels": tuple(values.get("x_levels", ())),
            "probs": tuple(values.get("x_probs", ())),
        }
    elif kind != "standard_normal":
        raise UsageError(f"x_model desconhecido: '{kind}' (standard_normal, uniform, discrete)")
    if "confounder" in values:
        conf = values["confounder"]
        if len(conf) != 3:
            raise UsageError("confounder exige três valores: alpha, kappa0, kappa1")
        fields["confounder"] = {"alpha": conf[0], "kappa0": conf[1], "kappa1": conf[2]}
    return fields


def parse_dgp_values(values: Dict[str, Any], source: str = "dgp") -> DgpConfig:
    try:
        return DgpConfig(**values)
    except ValidationError as e:
        raise UsageError(f"DgpConfig inválido em {source}: {e}") from e


def load_dgp_file(path: Union[str, Path]) -> DgpConfig:
    """
    Carrega um DgpConfig de arquivo `.json` ou texto `chave = valor`

    Raises:
        UsageError: arquivo ausente, chave desconhecida ou valor inválido
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"Arquivo de DGP ilegível: {path} ({e})") from e
    if path.suffix.lower() == ".json":
        try:
            values = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"JSON inválido em {path}: {e}") from e
    else:
        values = _assemble(_parse_lines(text, str(path)))
    cfg = parse_dgp_values(values, str(path))
    logger.info(f"📋 DGP carregado de {path}")
    return cfg


def dump_dgp_text(cfg: DgpConfig) -> str:
    lines = [f"{key} = {getattr(cfg, key)!r}" for key in SCALAR_KEYS]
    lines.append(f"s_model = {cfg.s_model[0]!r}, {cfg.s_model[1]!r}")
    xm = cfg.x_model
    lines.append(f"x_model = {xm.kind}")
    if isinstance(xm, UniformX):
        lines += [f"x_lo = {xm.lo!r}", f"x_hi = {xm.hi!r}"]
    elif isinstance(xm, DiscreteX):
        lines.append("x_levels = " + ", ".join(repr(v) for v in xm.levels))
        lines.append("x_probs = " + ", ".join(repr(v) for v in xm.probs))
    if cfg.confounder is not None:
        c = cfg.confounder
        lines.append(f"confounder = {c.alpha!r}, {c.kappa0!r}, {c.kappa1!r}")
    return "\n".join(lines) + "\n"


def dump_dgp_file(cfg: DgpConfig, path: Union[str, Path]) -> None:
    """Salva o DgpConfig; `.json` grava JSON, qualquer outra extensão grava texto"""
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(cfg.model_dump_json(indent=2), encoding="utf-8")
    else:
        path.write_text(dump_dgp_text(cfg), encoding="utf-8")
    logger.info(f"✅ DGP salvo em {path}")
