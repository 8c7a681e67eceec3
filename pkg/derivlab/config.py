import math
from pathlib import Path
from typing import Optional, Tuple

from pydantic import model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Laboratory configuration settings"""

    model_config = SettingsConfigDict(env_prefix="DERIVLAB_", extra="ignore")

    # Base directories
    BASE_DIR: Path = Path(__file__).resolve().parent
    OUTPUT_DIR: Path = Path.cwd() / "derivlab_runs"
    LOGS_DIR: Optional[Path] = None

    # Run ledger
    DATABASE_URL: Optional[str] = None

    PROJECT_NAME: str = "derivlab"
    VERSION: str = "1.0.0"

    # Logging
    LOG_LEVEL: str = "INFO"

    # Ensembles
    UNIT_MODULUS_TOL: float = 1e-10
    MAX_RESAMPLE: int = 10

    # Derivative roots
    MAX_POLY_DEGREE: int = 512
    RESIDUAL_TOL: float = 1e-9
    GAUSS_LUCAS_SLACK: float = 1e-9
    DISK_SLACK: float = 1e-12
    NEWTON_MAX_ITER: int = 60

    # Argument principle
    BITE_ANGLE: float = 1e-3
    MAX_PHASE_STEP: float = math.pi / 4
    HARD_PHASE_STEP: float = math.pi / 2
    CONTOUR_POINTS_PER_PIECE: int = 64
    CONTOUR_MAX_PASSES: int = 24

    # Importance sampling
    BATCH_COUNT: int = 50
    MIN_EFFECTIVE_SAMPLES: float = 100.0
    MIN_MOMENT_SAMPLES: int = 10_000

    # Histograms and mode detection
    S_HIST_BINS: int = 200
    S_HIST_RANGE: Tuple[float, float] = (0.0, 10.0)
    MODE_PROMINENCE: float = 0.05
    MIN_MODE_SAMPLES: int = 10_000

    # Zeta scan
    ZETA_SIGMA_OFFSET: float = 1e-6
    ZETA_SIGMA_MAX: float = 3.0
    ZETA_MAX_HEIGHT: float = 1e4
    ZETA_MIN_HEIGHT: float = 10.0
    ZETA_RESIDUAL_TOL: float = 1e-8
    ZETA_MAX_SUBDIVISION: int = 12

    # Workers
    WORKERS: int = 1
    SEED_BLOCK_SIZE: int = 2_000

    @model_validator(mode="after")
    def _derived_paths(self) -> "Settings":
        if self.LOGS_DIR is None:
            self.LOGS_DIR = self.OUTPUT_DIR / "logs"
        if self.DATABASE_URL is None:
            self.DATABASE_URL = f"sqlite:///{self.OUTPUT_DIR}/derivlab.db"
        return self

    def create_directories(self):
        """Create output and log directories"""
        for directory in [self.OUTPUT_DIR, self.LOGS_DIR]:
            directory.mkdir(parents=True, exist_ok=True)

    def get_run_dir(self, command: str, seed: int, output_dir: Optional[Path] = None) -> Path:
        """Get the artifact directory for one command run"""
        root = Path(output_dir) if output_dir is not None else self.OUTPUT_DIR
        run_dir = root / f"{command}-seed{seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        return run_dir

    @property
    def s_hist_edges(self) -> list:
        """Default S-histogram edges: S_HIST_BINS equal bins on S_HIST_RANGE"""
        lo, hi = self.S_HIST_RANGE
        width = (hi - lo) / self.S_HIST_BINS
        return [lo + k * width for k in range(self.S_HIST_BINS + 1)]


# Global settings instance
settings = Settings()
