"""
Configuration settings for the Axis Service
"""
from typing import Dict, Optional

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables first
load_dotenv()
load_dotenv(".env.local")


class Settings(BaseSettings):
    """Application settings"""
    PROJECT_NAME: str = "Complex Axis Solver"

    # Linear algebra tolerances
    TOL_RANK: float = 1e-10
    TOL_RES: float = 1e-10
    TOL_HERM: float = 1e-12
    TOL_DET: float = 1e-8

    # Projective geometry tolerances
    TOL_CHART: float = 1e-8
    TOL_PROJ: float = 1e-10
    TOL_RADIAL: float = 1e-9

    # Solver tolerances
    TOL_ACCEPT: float = 1e-9
    TOL_SCALAR: float = 1e-12
    TOL_POLY: float = 1e-8
    TOL_DEDUP: float = 1e-6
    TOL_DEGEN: float = 1e-6
    SNAP_TOL: float = 0.01

    # Newton / homotopy settings
    NEWTON_MAX_ITER: int = 100
    REPIVOT_THRESHOLD: float = 10.0
    HOMOTOPY_START_STEP: float = 0.05
    HOMOTOPY_MAX_STEP: float = 0.1
    HOMOTOPY_MIN_STEP: float = 1e-6
    HOMOTOPY_MAX_RETRIES: int = 5
    SINGULAR_COMBO_RESTARTS: int = 200
    HEDGEHOG_RESTARTS: int = 200
    HEDGEHOG_DESCENT_STEPS: int = 200
    HEDGEHOG_DESCENT_TOL: float = 1e-10
    HEDGEHOG_POLISH_RADIUS: float = 1e-3

    # Quadrature settings
    CIRCLE_NODES: int = 256
    POLAR_NODES: int = 64
    AZIMUTH_NODES: int = 128
    MC_NODES: int = 200000
    FD_STEP: float = 1e-5
    TUBE_EPSILON: float = 0.2
    WINDING_RADIUS: float = 0.1
    WINDING_NODES: int = 1024

    # Runtime settings
    # overrides --seed when set
    AXIS_SEED: Optional[int] = None
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = False

    @field_validator("SNAP_TOL", "FD_STEP", "TUBE_EPSILON", "WINDING_RADIUS")
    @classmethod
    def check_unit_interval(cls, v: float) -> float:
        """Keep the geometric knobs inside (0, 1)"""
        if not 0.0 < v < 1.0:
            raise ValueError(f"value {v} must lie in (0, 1)")
        return v

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_file=[".env", ".env.local"],
        env_file_encoding="utf-8",
        extra="ignore",
    )

    def tolerances(self) -> Dict[str, float]:
        """Tolerance fields that the CLI may override"""
        return {
            name: value
            for name, value in self.model_dump().items()
            if name.startswith("TOL_") or name == "SNAP_TOL"
        }


settings = Settings()
