"""
Configuration settings using Pydantic for validation.
All settings are loaded from environment variables with sensible defaults.
"""

from pathlib import Path
from typing import List

from pydantic import Field
from pydantic_settings import BaseSettings
from dotenv import load_dotenv

# Load .env file from project root
PROJECT_ROOT = Path(__file__).parent.parent.parent
load_dotenv(PROJECT_ROOT / ".env")


class PrecisionSettings(BaseSettings):
    """Working precision for series and certificates"""
    digits: int = Field(default=60, ge=15, le=240, alias="LATFORGE_PRECISION")
    guard_digits: int = Field(default=10, ge=0, alias="LATFORGE_GUARD_DIGITS")
    max_digits: int = Field(default=240, ge=30, alias="LATFORGE_MAX_PRECISION")

    model_config = {"populate_by_name": True, "extra": "ignore"}


class BudgetSettings(BaseSettings):
    """Desk-scale guards; tripping one raises BudgetExceededError"""
    max_rank: int = 12
    max_points: int = 10_000_000
    max_maxlin_vars: int = 24
    max_series_terms: int = 2_000_000
    max_gadget_dim: int = 10
    max_build_dim: int = 12

    model_config = {"env_prefix": "LATFORGE_BUDGET_", "extra": "ignore"}


class GadgetSettings(BaseSettings):
    """Locally dense gadget search"""
    z_cap: int = 32
    max_table_exponent: int = 22  # largest 2^z residue table built in memory
    tie_tolerance: float = 1e-12
    svp_tau: float = 1.0
    bdd_t_points: int = 101
    bdd_tau_points: int = 160
    max_residues: int = 64

    model_config = {"env_prefix": "LATFORGE_GADGET_", "extra": "ignore"}


class ReductionSettings(BaseSettings):
    """Reduction pipeline defaults"""
    epsilon: str = "0.05"
    prime_attempts: int = 10_000
    prime_scan_width: int = 1_000_000
    toy_dim: int = 4
    toy_prime_cap: int = 3
    rational_den: int = 10**12
    radius_den: int = 10**48  # scale and alpha splits in the BDD block lattice

    model_config = {"env_prefix": "LATFORGE_REDUCTION_", "extra": "ignore"}


class VerifierSettings(BaseSettings):
    """Acceptance suite sizes"""
    sparsification_trials: int = 10_000
    sparsification_primes: List[int] = [3, 5, 11]
    pipeline_instances: int = 500
    sigma_widening: float = 4.0
    derivative_grid: int = 200
    explorer_digits: int = 30

    model_config = {"env_prefix": "LATFORGE_VERIFY_", "extra": "ignore"}


class Settings(BaseSettings):
    """Main settings aggregator"""
    precision: PrecisionSettings = PrecisionSettings()
    budget: BudgetSettings = BudgetSettings()
    gadget: GadgetSettings = GadgetSettings()
    reduction: ReductionSettings = ReductionSettings()
    verifier: VerifierSettings = VerifierSettings()

    # Logging
    log_level: str = Field(default="INFO", alias="LATFORGE_LOG_LEVEL")
    log_file: Path = Field(default=PROJECT_ROOT / "data" / "latforge.log", alias="LATFORGE_LOG_FILE")
    output_dir: Path = Field(default=PROJECT_ROOT / "data", alias="LATFORGE_OUTPUT_DIR")

    model_config = {"populate_by_name": True, "extra": "ignore"}


# Global settings instance
settings = Settings()

# Ensure data directory exists
settings.output_dir.mkdir(parents=True, exist_ok=True)
