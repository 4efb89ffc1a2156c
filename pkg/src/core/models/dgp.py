"""
Configuração do processo gerador de dados (DGP) estrutural

    Y = α + τT + ωS + βX + δTS + ξTX + ε

com T ~ Bernoulli(p), S ~ Bernoulli(logistic(a + bX)) e ε ~ N(0, σ²).
"""

from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class StandardNormalX(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["standard_normal"] = "standard_normal"


class UniformX(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["uniform"] = "uniform"
    lo: float = 0.0
    hi: float = 1.0

    @model_validator(mode="after")
    def validate_bounds(self) -> "UniformX":
        if not self.lo < self.hi:
            raise ValueError("Uniform exige lo < hi")
        return self


class DiscreteX(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["discrete"] = "discrete"
    levels: Tuple[float, ...]
    probs: Tuple[float, ...]

    @model_validator(mode="after")
    def validate_probs(self) -> "DiscreteX":
        if len(self.levels) != len(self.probs) or not self.levels:
            raise ValueError("Discrete exige levels e probs do mesmo tamanho (não vazios)")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilidades negativas em Discrete")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError(f"probs de Discrete devem somar 1 (soma={sum(self.probs)})")
        return self


XModel = Annotated[Union[StandardNormalX, UniformX, DiscreteX], Field(discriminator="kind")]


class ConfounderConfig(BaseModel):
    """Confundidor binário U ~ B(1, 1/2) plantado no DGP (modelo de sensibilidade)"""

    model_config = ConfigDict(frozen=True, extra="forbid")
    alpha: float = 0.0
    kappa0: float = 0.0
    kappa1: float = 0.0


class DgpConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = 0.0
    tau: float = 1.0
    omega: float = 1.0
    beta: float = 1.0
    delta: float = 2.0
    xi: float = 1.5
    sigma_eps: float = Field(1.0, gt=0.0)
    p_treat: float = Field(0.5, gt=0.0, lt=1.0)
    s_model: Tuple[float, float] = (0.0, 1.0)
    x_model: XModel = Field(default_factory=StandardNormalX)
    n: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    noise_covariates: int = Field(0, ge=0)
    confounder: Optional[ConfounderConfig] = None

    @property
    def s_intercept(self) -> float:
        return self.s_model[0]

    @property
    def s_slope(self) -> float:
        return self.s_model[1]

    def covariate_names(self, reveal_confounder: bool = False) -> List[str]:
        names = ["x"] + [f"noise{j + 1}" for j in range(self.noise_covariates)]
        if reveal_confounder and self.confounder is not None:
            names.append("u")
        return names
