"""
Solver settings for the numerical routines.
Groups the knobs of the minimizer, the witness search, the Voronoi tools and
the regression simulation so a single YAML file can tune all of them.

Supports configuration via:
- Python code (SolverSettings and its section classes)
- YAML file (load_settings_from_yaml function)
"""
from typing import Optional, Tuple
from pathlib import Path
import yaml
from pydantic import BaseModel, Field, field_validator


class MinimizerSettings(BaseModel):
    """
    Settings for report minimization (coarse grid + golden-section refinement).

    Examples:
        # Finer coarse stage for wiggly objectives
        MinimizerSettings(coarse_grid=2048)
    """
    coarse_grid: int = Field(default=512, ge=16, description="Coarse grid points per report coordinate.")
    golden_width: float = Field(default=1e-8, gt=0, description="Final bracket width of the golden-section stage.")
    sweeps: int = Field(default=20, ge=1, description="Maximum coordinate sweeps for 2-dimensional reports.")
    flat_tol: float = Field(default=1e-13, gt=0, description="Objective range below which the minimizer is declared non-unique.")


class WitnessSettings(BaseModel):
    """Settings for level-set sampling and the phase-1 feasibility solver."""
    line_scan: int = Field(default=10_000, ge=10, description="Scan points on the segment between two outcomes.")
    face_grid: int = Field(default=200, ge=4, description="Grid resolution on a 3-outcome face.")
    bisection_tol: float = Field(default=1e-12, gt=0, description="Target |Γ(p) − r| of refined roots.")
    level_tol: float = Field(default=1e-9, gt=0, description="Largest |Γ(p) − r| accepted in a level-set sample.")
    pivot_tol: float = Field(default=1e-11, gt=0, description="Pivot tolerance of the simplex tableau.")
    slab: float = Field(default=1e-9, gt=0, description="Half-width of the relaxed mixture equalities.")
    residual_tol: float = Field(default=1e-7, gt=0, description="Largest residual of an accepted witness.")
    quantiles: Tuple[float, float] = Field(
        default=(0.35, 0.65),
        description="Quantiles of the scanned property values used as r1, r2 by frontier refutations."
    )

    @field_validator("quantiles")
    @classmethod
    def validate_quantiles(cls, v):
        """Both quantiles must be strictly inside (0, 1) and distinct."""
        lo, hi = v
        if not (0.0 < lo < 1.0 and 0.0 < hi < 1.0) or lo == hi:
            raise ValueError("quantiles must be two distinct values in (0, 1)")
        return v


class VoronoiSettings(BaseModel):
    """Settings for nearest-site assignment."""
    tie_tol: float = Field(default=1e-10, gt=0, description="Distance slack under which sites count as tied.")


class RegressionSettings(BaseModel):
    """Settings for the regression simulation."""
    grid_points: int = Field(default=1001, ge=2, description="Uniform x-grid on [0, 1] used to score variance functions.")


class SolverSettings(BaseModel):
    """
    All solver sections together.
    Missing sections fall back to their defaults.
    """
    minimizer: MinimizerSettings = Field(default_factory=MinimizerSettings)
    witness: WitnessSettings = Field(default_factory=WitnessSettings)
    voronoi: VoronoiSettings = Field(default_factory=VoronoiSettings)
    regression: RegressionSettings = Field(default_factory=RegressionSettings)


def load_settings_from_yaml(config_path: str = "config.yaml") -> SolverSettings:
    """
    Loads solver settings from a YAML (or JSON) file.

    Args:
        config_path: Path to the settings file. Defaults to "config.yaml".

    Returns:
        SolverSettings instance with the loaded sections.

    Raises:
        FileNotFoundError: If the file doesn't exist.
        ValueError: If the document is empty or not a mapping.

    Example YAML structure:
        minimizer:
          coarse_grid: 512
          golden_width: 1.0e-8
        witness:
          slab: 1.0e-9
    """
    path = Path(config_path)
    if not path.exists():
        raise FileNotFoundError(f"Settings file not found: {config_path}")

    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)

    if not data:
        raise ValueError(f"Settings file is empty: {config_path}")
    if not isinstance(data, dict):
        raise ValueError(f"Settings file must contain a mapping: {config_path}")

    # A run config may embed the solver sections under "settings"
    if "settings" in data and isinstance(data["settings"], dict):
        data = data["settings"]

    known = {"minimizer", "witness", "voronoi", "regression"}
    return SolverSettings(**{k: v for k, v in data.items() if k in known})


def try_load_settings_from_yaml(config_path: str = "config.yaml") -> Optional[SolverSettings]:
    """
    Attempts to load settings, returns None if the file doesn't exist.

    Args:
        config_path: Path to the YAML settings file.

    Returns:
        SolverSettings if the file exists and is valid, None otherwise.
    """
    try:
        return load_settings_from_yaml(config_path)
    except FileNotFoundError:
        return None
