"""Application configuration via pydantic-settings."""

from __future__ import annotations

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library and CLI defaults loaded from environment variables prefixed with ``GPMEM_``."""

    model_config = SettingsConfigDict(
        env_prefix="GPMEM_",
        env_file=".env",
        env_file_encoding="utf-8",
    )

    # ── Numerics ─────────────────────────────────────────────────────────
    jitter_base: float = Field(
        default=1e-8, gt=0.0, description="Initial jitter, relative to mean(diag(K))"
    )
    jitter_max: float = Field(default=1e-2, gt=0.0, description="Largest relative jitter tried")
    jitter_growth: float = Field(default=10.0, gt=1.0)

    # ── Structure discovery ──────────────────────────────────────────────
    operator_prob: float = Field(
        default=0.5, ge=0.0, le=1.0, description="P(join is a sum) in the kernel grammar"
    )
    burn_in_fraction: float = Field(default=0.25, ge=0.0, lt=1.0)
    discovery_repeats: int = Field(default=200, ge=1)

    # ── Regression ───────────────────────────────────────────────────────
    grid_size: int = Field(default=201, ge=2, description="Points in predictive-band grids")
    emulator_paths: int = Field(default=5, ge=0, description="Emulator sample paths emitted")
    regress_repeats: int = Field(default=100, ge=0)

    # ── Gradient ascent ──────────────────────────────────────────────────
    gradient_step_size: float = Field(default=1e-2, gt=0.0)
    gradient_max_halvings: int = Field(default=20, ge=0)

    # ── Bayesian optimisation ────────────────────────────────────────────
    bo_lo: float = -20.0
    bo_hi: float = 20.0
    bo_iterations: int = Field(default=15, ge=0)
    bo_candidates: int = Field(default=20, ge=1)
    bo_update_steps: int = Field(default=50, ge=0)
    bo_temperature: float = Field(default=1.0, gt=0.0)
    bo_navg: int = Field(default=10, ge=1)
    bo_drift_width: float = Field(default=1.0, gt=0.0)
    bo_search_steps: int = Field(default=30, ge=0)
    bo_grid_size: int = Field(default=512, ge=2)

    # ── External objectives ──────────────────────────────────────────────
    objective_timeout_s: float = Field(default=30.0, gt=0.0)
    objective_max_retries: int = Field(default=3, ge=1)
    objective_retry_backoff_base: float = Field(default=2.0, ge=1.0)

    # ── Concurrency / output ─────────────────────────────────────────────
    max_chains: int = Field(default=4, ge=1, description="Max chains running concurrently")
    output_dir: Path = Field(default=Path("out"))

    # ── Logging ──────────────────────────────────────────────────────────
    log_level: str = Field(default="INFO")
    log_json: bool = Field(
        default=False, description="Emit structured JSON logs (set True in CI/prod)"
    )


settings = Settings()
