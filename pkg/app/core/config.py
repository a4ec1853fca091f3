"""
DCLED - Configuration Settings
"""

from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.field import SchemeParams


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "DCLED"
    log_level: str = "INFO"

    # Daemon
    host: str = "127.0.0.1"
    port: int = Field(default=7401, ge=0, le=65535)
    server_index: int = Field(default=1, ge=1, description="1-based role of this daemon")
    protocol_version: int = 1

    # Storage
    data_dir: Path = Field(default=Path("./data"), description="Append-only log directory")
    log_filename: str = "shares.log"
    fsync_writes: bool = True

    # Field
    security_lambda: int = Field(default=128, ge=2)
    modulus: int | None = Field(
        default=None,
        description="Prime modulus override (decimal or 0x-hex); must match security_lambda",
    )

    # Client
    client_timeout_seconds: float = 30.0
    client_retries: int = 0  # The client never retries unless asked explicitly

    # Bench / game
    bench_repetitions: int = Field(default=5, ge=5)
    bench_seed: int = 20240601
    game_trials: int = 100_000

    # d-server schemes
    max_servers: int = Field(default=8, ge=2, le=16, description="Largest supported d")

    @field_validator("modulus", mode="before")
    @classmethod
    def parse_modulus(cls, v: object) -> object:
        if isinstance(v, str) and v.strip():
            return int(v.strip(), 0)
        if isinstance(v, str):
            return None
        return v

    @property
    def scheme_params(self) -> SchemeParams:
        """Field parameters for this deployment."""
        if self.modulus is not None:
            return SchemeParams.create(self.modulus, self.security_lambda)
        return SchemeParams.for_lambda(self.security_lambda)

    @property
    def log_path(self) -> Path:
        """Full path of this daemon's append-only share log."""
        return self.data_dir / self.log_filename


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
