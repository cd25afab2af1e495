"""
Environment settings and configuration management using Pydantic.
Centralizes all environment variables with validation.
"""

from pydantic import field_validator
from pydantic_settings import BaseSettings

from config import TWIST_RANGE_FACTOR


class Settings(BaseSettings):
    """Engine settings loaded from environment variables and .env file."""

    # Equivariant side: extra degrees above the default window -codim + 2n
    koszul_degree_window: int = 0

    # Logging
    log_level: str = "WARNING"

    # Memo tables (wedge tables, pairing matrices)
    memo_max_size: int = 4096

    # Randomized isomorphism witness search
    isomorphism_attempts: int = 12
    isomorphism_seed: int = 20240613
    isomorphism_coefficient_bound: int = 7

    # Ext^1 twist search bound factor (check --twist-range)
    twist_range_factor: int = TWIST_RANGE_FACTOR

    # Parallel checks
    jobs: int = 1

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False
        extra = "ignore"  # Ignore unexpected environment variables

    @field_validator("koszul_degree_window", "jobs", "memo_max_size", "isomorphism_attempts", "twist_range_factor")
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("must be non-negative")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return level

    @property
    def parallel_enabled(self) -> bool:
        """Check if per-face checks run in worker processes."""
        return self.jobs > 1

    @property
    def degree_window_widened(self) -> bool:
        """Check if the equivariant degree window was widened."""
        return self.koszul_degree_window > 0


# Global settings instance
settings = Settings()
