# superdec/core/config.py
from functools import lru_cache
from pydantic_settings import BaseSettings
from typing import Optional, Literal

class Settings(BaseSettings):
    # Reproducibility
    SUPER_SEED: Optional[int] = None  # overrides train.seed of any experiment config
    DEFAULT_DTYPE: Literal["f32", "f64"] = "f32"

    # Spectral-norm estimation
    POWER_ITER_MAX_ITERS: int = 200
    POWER_ITER_TOL: float = 1e-6
    POWER_ITER_SEED: int = 0
    JVP_STEP: float = 1e-5  # central-difference step for Jacobian-vector products
    NORM_SAMPLES: int = 10  # linearization points per bound check
    BOUND_SLACK: float = 0.01

    # Evaluation
    SEG_THRESHOLD: float = 0.5
    PSNR_CAP_DB: float = 99.0

    # Training diagnostics
    GRAD_VANISH_THRESHOLD: float = 1e-12

    # Outputs
    OUTPUT_DIR: str = "runs"
    PNG_PREVIEWS: bool = False

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    class Config:
        env_file = ".env"
        case_sensitive = True

# Create a global settings instance
settings = Settings()

@lru_cache()
def get_settings() -> Settings:
    return Settings()
