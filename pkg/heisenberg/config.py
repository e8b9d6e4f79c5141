from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Runtime
    debug: bool = False
    log_level: str = "INFO"

    # Worker pool cap for grid evaluations and scans (HEISENBERG_MAX_WORKERS)
    max_workers: int = 4

    # Tolerance configuration
    tolerance_config_path: str = "tolerances.json"
    default_tol: float = 1e-10

    # Quadrature behaviour
    lambda_max_refinements: int = 4
    boundary_decay_ratio: float = 1e-3
    chunk_elements: int = 2_000_000

    # Wall times in verification reports; off gives byte-identical report files
    report_timing: bool = True

    # Optional output directory for CSV/JSON artifacts
    output_dir: Optional[str] = None

    # Look for .env in multiple locations
    model_config = SettingsConfigDict(env_file=[".env", "../.env"], env_prefix="HEISENBERG_", extra="ignore")


settings = Settings()
