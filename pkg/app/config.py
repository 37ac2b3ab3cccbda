"""Configuration management for the attitude control simulator."""

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Integration
    sim_dt: float = Field(default=1e-3, gt=0, description="Default fixed RK4 step (s)")
    sim_duration: float = Field(default=10.0, gt=0, description="Default run duration (s)")
    default_seed: int = Field(default=0, ge=0, description="Seed used when a scenario gives none")
    max_steps: int = Field(
        default=10_000_000,
        description="Upper bound on duration/dt for a single run"
    )
    logdet_retry_limit: int = Field(
        default=4,
        description="Step halvings allowed when a log-det estimate leaves the PD cone"
    )

    # Metrics
    settling_threshold: float = Field(
        default=0.01,
        gt=0,
        description="Attitude error norm below which a run counts as settled"
    )
    switch_gate: float = Field(
        default=0.05,
        gt=0,
        description="Branch changes below this error norm are ignored"
    )

    # Output
    max_log_rows: int = Field(default=10_000, ge=2, description="Row cap for a RunLog")
    output_dir: Path = Field(default=Path("./results"), description="Default CSV output directory")
    compare_workers: int = Field(default=1, ge=1, description="Worker processes for compare")

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Path = Field(default=Path("./logs/attitude.log"), description="Log file path")

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        # Create necessary directories
        self.log_file.parent.mkdir(parents=True, exist_ok=True)


# Global settings instance
settings = Settings()
