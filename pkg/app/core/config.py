"""
Application Configuration
"""
from pathlib import Path
from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables (prefix CIID_).
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="CIID_",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Settings
    APP_NAME: str = "ciid-lab"
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"

    # Logging Settings
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = True

    # Output Settings
    OUTPUT_DIR: str = "output"
    UNDEFINED_TOKEN: str = "undefined"

    # Worker Settings
    WORKERS: int = 4

    # Monte Carlo Settings
    MC_BLOCK_SIZE: int = 4096
    MC_DEFAULT_REPLICATES: int = 200_000
    MC_DEFAULT_ABS_TOL: float = 1e-3
    MC_DEFAULT_SE_MULT: float = 4.0

    # Experiment Settings
    DEFAULT_RUNS: int = 18

    @field_validator("WORKERS", "MC_BLOCK_SIZE")
    @classmethod
    def at_least_one(cls, v: int) -> int:
        return max(1, v)

    @field_validator("LOG_LEVEL")
    @classmethod
    def upper_log_level(cls, v: str) -> str:
        return v.upper()

    @property
    def output_path(self) -> Path:
        return Path(self.OUTPUT_DIR)

    @property
    def log_path(self) -> Optional[Path]:
        return Path(self.LOG_DIR) if self.LOG_TO_FILE else None


# Global settings instance
settings = Settings()
