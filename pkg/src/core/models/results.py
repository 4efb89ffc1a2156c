"""
Tipos de resultado compartilhados pelos estimadores e diagnósticos
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from scipy import stats

from src.core.errors import DegenerateVarianceError


class Method(str, Enum):
    """Estimadores disponíveis (valor = nome estável usado nos relatórios)"""

    SUBSET_DIFFERENCE = "SubsetDifference"
    CONTROLLED_INTERACTION = "ControlledInteraction"
    PARALLEL_REGRESSION = "ParallelRegression"
    FULL_INTERACTION = "FullInteraction"
    PARALLEL_MATCHING = "ParallelMatching"
    PROPENSITY_WEIGHTING = "PropensityWeighting"
    PARALLEL_WEIGHTING = "ParallelWeighting"

    @property
    def slug(self) -> str:
        """Nome em kebab-case usado pela CLI (ex.: 'parallel-regression')"""
        return "-".join(part.lower() for part in _split_camel(self.value))

    @classmethod
    def from_slug(cls, slug: str) -> "Method":
        for method in cls:
            if method.slug == slug or method.value == slug:
                return method
        raise ValueError(f"método desconhecido: {slug}")


def _split_camel(name: str):
    parts, current = [], ""
    for ch in name:
        if ch.isupper() and current:
            parts.append(current)
            current = ch
        else:
            current += ch
    parts.append(current)
    return parts


class VarianceMode(str, Enum):
    CLASSICAL = "Classical"
    HETEROSKEDASTICITY_ROBUST = "HeteroskedasticityRobust"
    CLUSTER_ROBUST = "ClusterRobust"


def normal_interval(estimate: float, std_error: float, level: float) -> Tuple[float, float]:
    """IC simétrico pela aproximação normal (sem correção t)"""
    z = float(stats.norm.ppf(0.5 + level / 2.0))
    return estimate - z * std_error, estimate + z * std_error


@dataclass(frozen=True)
class SubsetComponents:
    """(γ̂₀, Var γ̂₀) e (γ̂₁, Var γ̂₁) dos métodos paralelos"""

    gamma0: float
    var0: float
    gamma1: float
    var1: float

    def to_dict(self) -> Dict[str, float]:
        return {"gamma0": self.gamma0, "var0": self.var0, "gamma1": self.gamma1, "var1": self.var1}


@dataclass(frozen=True)
class EstimateResult:
    method: Method
    estimate: float
    variance: float
    std_error: float
    ci_lower: float
    ci_upper: float
    level: float = 0.95
    subset_components: Optional[SubsetComponents] = None
    cell_counts: Dict[str, int] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        method: Method,
        estimate: float,
        variance: float,
        level: float,
        cell_counts: Dict[str, int],
        subset_components: Optional[SubsetComponents] = None,
        diagnostics: Optional[Dict[str, Any]] = None,
    ) -> "EstimateResult":
        """
        Monta o resultado com erro-padrão e IC normal.

        Variância NaN significa "indefinida" (ex.: célula com uma única linha):
        o ponto é mantido, erro-padrão e IC ficam NaN e diagnostics["variance_defined"]
        é False.

        Raises:
            DegenerateVarianceError: variância negativa ou infinita
        """
        variance = float(variance)
        diagnostics = dict(diagnostics or {})
        if math.isnan(variance):
            diagnostics["variance_defined"] = False
            se, lo, hi = math.nan, math.nan, math.nan
        elif variance < 0.0 or math.isinf(variance):
            raise DegenerateVarianceError(f"{method.value}: variância inválida ({variance})")
        else:
            se = math.sqrt(variance)
            lo, hi = normal_interval(float(estimate), se, level)
        return cls(
            method=method,
            estimate=float(estimate),
            variance=variance,
            std_error=se,
            ci_lower=lo,
            ci_upper=hi,
            level=level,
            subset_components=subset_components,
            cell_counts=dict(cell_counts),
            diagnostics=diagnostics,
        )

    @classmethod
    def from_components(
        cls,
        method: Method,
        components: SubsetComponents,
        level: float,
        cell_counts: Dict[str, int],
        diagnostics: Optional[Dict[str, Any]] = None,
    ) -> "EstimateResult":
        """δ̂ = γ̂₁ − γ̂₀ e Var(δ̂) = Var(γ̂₀) + Var(γ̂₁)"""
        return cls.build(
            method,
            components.gamma1 - components.gamma0,
            components.var0 + components.var1,
            level,
            cell_counts,
            subset_components=components,
            diagnostics=diagnostics,
        )

    @property
    def variance_defined(self) -> bool:
        return not math.isnan(self.variance)

    def covers(self, value: float) -> bool:
        return self.ci_lower <= value <= self.ci_upper

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method.value,
            "estimate": self.estimate,
            "variance": self.variance,
            "std_error": self.std_error,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "level": self.level,
            "subset_components": None if self.subset_components is None else self.subset_components.to_dict(),
            "cell_counts": dict(self.cell_counts),
            "diagnostics": dict(self.diagnostics),
        }


@dataclass(frozen=True)
class SupportReport:
    """Diagnóstico de suporte comum (P(S=1|X) no interior de (0,1))"""

    cell_counts: Dict[str, int]
    propensity_range: Dict[int, Optional[Tuple[float, float]]]
    epsilon: float
    empty_cell: bool
    within_bounds: bool
    separation: Dict[int, bool] = field(default_factory=dict)
    messages: Tuple[str, ...] = ()

    @property
    def any_separation(self) -> bool:
        return any(self.separation.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cell_counts": dict(self.cell_counts),
            "propensity_range": {
                f"T{t}": None if rng is None else {"min": rng[0], "max": rng[1]}
                for t, rng in self.propensity_range.items()
            },
            "epsilon": self.epsilon,
            "empty_cell": self.empty_cell,
            "within_bounds": self.within_bounds,
            "separation": {f"T{t}": flag for t, flag in self.separation.items()},
            "messages": list(self.messages),
        }


@dataclass(frozen=True)
class CovariateBalance:
    """SMD de uma covariável dentro de um subconjunto de tratamento"""

    covariate: str
    treatment_level: int
    smd_before: Optional[float]
    smd_after: Optional[float] = None
    flag: Optional[str] = None


@dataclass(frozen=True)
class BalanceReport:
    rows: Tuple[CovariateBalance, ...]
    sample_sizes: Dict[int, Dict[str, float]]
    matched: bool

    def smd(self, covariate: str, treatment_level: int, after: bool = False) -> Optional[float]:
        for row in self.rows:
            if row.covariate == covariate and row.treatment_level == treatment_level:
                return row.smd_after if after else row.smd_before
        raise KeyError(f"{covariate} em T={treatment_level}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "matched": self.matched,
            "sample_sizes": {f"T{t}": sizes for t, sizes in self.sample_sizes.items()},
            "covariates": [
                {
                    "covariate": r.covariate,
                    "treatment": r.treatment_level,
                    "smd_before": r.smd_before,
                    **({"smd_after": r.smd_after} if self.matched else {}),
                    "flag": r.flag,
                }
                for r in self.rows
            ],
        }
