from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple, Type

from pydantic import Field, field_validator, model_validator
from pydantic_settings import (
    BaseSettings,
    JsonConfigSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

DEFAULTS_FILE = Path(__file__).resolve().parents[3] / "config" / "defaults.json"


class Settings(BaseSettings):
    # Metadados do App
    APP_ENV: str = "production"

    # --- Diagnósticos de suporte comum ---
    SUPPORT_EPSILON: float = Field(0.01, gt=0.0, lt=0.5)

    # --- Ponderação por propensão ---
    PROPENSITY_TRIM_LOWER: float = Field(0.01, gt=0.0, lt=0.5)
    PROPENSITY_TRIM_UPPER: float = Field(0.99, gt=0.5, lt=1.0)

    # --- Inferência ---
    CONFIDENCE_LEVEL: float = Field(0.95, gt=0.0, lt=1.0)
    BOOTSTRAP_REPS: int = Field(0, ge=0)

    # --- Simulação ---
    ORACLE_DRAWS: int = Field(1_000_000, ge=1_000_000)

    # --- Sensibilidade ---
    LEVEL_CURVE_TOLERANCE: float = Field(1e-3, gt=0.0)
    LEVEL_CURVE_MAX_KAPPA: float = Field(64.0, gt=0.0)

    # --- Paralelismo (None = todos os núcleos) ---
    DEFAULT_THREADS: Optional[int] = Field(None, ge=1)

    @field_validator('APP_ENV')
    @classmethod
    def validate_environment(cls, v: str) -> str:
        valid_envs = ['development', 'staging', 'production']
        if v not in valid_envs:
            raise ValueError(f'APP_ENV deve ser um de: {", ".join(valid_envs)}')
        return v

    @model_validator(mode="after")
    def validate_trim(self) -> "Settings":
        if self.PROPENSITY_TRIM_LOWER >= self.PROPENSITY_TRIM_UPPER:
            raise ValueError('PROPENSITY_TRIM_LOWER deve ser menor que PROPENSITY_TRIM_UPPER')
        return self

    def is_development(self) -> bool: return self.APP_ENV == "development"
    def is_staging(self) -> bool: return self.APP_ENV == "staging"
    def is_production(self) -> bool: return self.APP_ENV == "production"

    def get_log_level(self) -> str:
        if self.is_development(): return "DEBUG"
        if self.is_staging(): return "INFO"
        return "WARNING"

    @property
    def propensity_trim(self) -> Tuple[float, float]:
        return (self.PROPENSITY_TRIM_LOWER, self.PROPENSITY_TRIM_UPPER)

    model_config = SettingsConfigDict(json_file=DEFAULTS_FILE, extra="ignore")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        # Sem variáveis de ambiente nem .env: apenas argumentos explícitos e o JSON do repositório
        return (init_settings, JsonConfigSettingsSource(settings_cls))


@lru_cache()
def get_settings():
    return Settings()
