"""Process-level settings read from the environment."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

DEFAULT_OUTPUT_DIR = "runs"


class RuntimeSettings(BaseSettings):
    """Where runs are written and how the process logs and traces."""

    model_config = SettingsConfigDict(env_prefix="SAP_", env_file=".env", env_file_encoding="utf-8", extra="ignore")

    output_dir: Path = Field(default=Path(DEFAULT_OUTPUT_DIR), description="Default root for run outputs.")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(default="INFO")

    telemetry_enabled: bool = Field(default=False)
    telemetry_service_name: str = Field(default="situational-options")
    telemetry_otlp_endpoint: str | None = Field(default=None)
    telemetry_otlp_insecure: bool = Field(default=True)
    telemetry_sample_ratio: float = Field(default=1.0, ge=0.0, le=1.0)

    def dict_for_logging(self) -> dict[str, Any]:
        """Return a plain dict for logging purposes."""

        return {key: str(value) if isinstance(value, Path) else value for key, value in self.model_dump().items()}


@lru_cache(maxsize=1)
def get_settings(**overrides: Any) -> RuntimeSettings:
    """Return cached runtime settings with optional overrides."""

    if overrides:
        return RuntimeSettings(**overrides)
    return RuntimeSettings()


__all__ = ["DEFAULT_OUTPUT_DIR", "RuntimeSettings", "get_settings"]
