"""
Configuration settings for Majority Lab using Pydantic BaseSettings.

Every field can be overridden through an ``MDL_``-prefixed environment
variable or a ``.env`` file, e.g. ``MDL_SEED=42`` changes the default
``--seed`` of every subcommand.
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    # Reproducibility
    seed: int = Field(
        default=0,
        ge=0,
        le=2**64 - 1,
        description="Default master seed when --seed is not given (MDL_SEED)"
    )

    # Logging Configuration
    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR)"
    )

    # Execution
    threads: int = Field(
        default=1,
        ge=1,
        description="Default worker process count for trial execution"
    )

    # Estimation
    wilson_z: float = Field(
        default=1.96,
        gt=0.0,
        description="Normal quantile used for Wilson score intervals"
    )

    # Exact binomial oracle
    oracle_exact_limit: int = Field(
        default=5000,
        ge=1,
        description="Binomial size above which supports are tail-truncated"
    )

    oracle_tail_mass: float = Field(
        default=1e-14,
        gt=0.0,
        lt=1e-3,
        description="Probability mass dropped per side when truncating a support"
    )

    chernoff_exact_limit: int = Field(
        default=3000,
        ge=1,
        description="Largest n for which Bernoulli-sum tails are convolved exactly"
    )

    chernoff_mc_samples: int = Field(
        default=200_000,
        ge=1000,
        description="Monte Carlo sample size when exact convolution is too large"
    )

    # Desk-scale acceptance thresholds
    theorem1_min_p_hat: float = Field(
        default=0.90,
        ge=0.0,
        le=1.0,
        description="Minimum empirical P{MCon(3)} for the theorem1 suite"
    )

    theorem1_min_ci_low: float = Field(
        default=0.85,
        ge=0.0,
        le=1.0,
        description="Minimum Wilson lower bound of P{MCon(3)} for the theorem1 suite"
    )

    theorem2_max_p_hat: float = Field(
        default=0.05,
        ge=0.0,
        le=1.0,
        description="Maximum empirical P{Con(2)} at the largest n of the theorem2 suite"
    )

    model_config = SettingsConfigDict(
        env_prefix="MDL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )


# Global settings instance
settings = Settings()
