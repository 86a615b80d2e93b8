"""Configuration management using Pydantic Settings.

Loads configuration from environment variables (prefix ``EPISODIC_``) with
.env file support.
"""

import os
from typing import Literal, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application configuration."""

    # Parallel execution
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1)
    executor: Literal["thread", "process"] = "thread"
    parallel_min_chunk: int = 4096

    # Tracking compaction
    flag_slab_cap: int = 64

    # Oracle guards
    oracle_max_events: int = 500
    oracle_max_nodes: int = 6

    # Mining / MapConcat defaults
    strategy_switch_level: int = 3
    default_segments: int = 4

    # Logging
    log_level: str = "WARNING"
    log_dir: Optional[str] = None

    # GlitchTip / Sentry error monitoring
    glitchtip_dsn: Optional[str] = None
    environment: str = "development"

    model_config = SettingsConfigDict(
        env_prefix="EPISODIC_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("workers", "parallel_min_chunk", "flag_slab_cap", "default_segments")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value


# Create a global settings instance
settings = Settings()
