import os
from functools import lru_cache
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Settings(BaseModel):
    """Process-wide knobs. They change speed and verbosity, never results."""

    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    log_level: str = "warning"

    model_config = ConfigDict(frozen=True)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.lower()
        if value not in {"debug", "info", "warning", "error", "critical"}:
            raise ValueError(f"Unknown log level {value!r}.")
        return value

    @classmethod
    def from_env(cls) -> "Settings":
        raw: dict[str, Optional[str]] = {
            "threads": os.environ.get("SL2LAB_THREADS"),
            "log_level": os.environ.get("SL2LAB_LOG_LEVEL"),
        }
        return cls.model_validate({k: v for k, v in raw.items() if v})


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()
