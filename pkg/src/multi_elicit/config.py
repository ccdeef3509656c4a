"""
Run configuration for the command-line front end, using Pydantic.

Supports configuration via:
- Command-line flags (always win)
- A JSON or YAML file passed with --config
- Environment variables / .env (MULTI_ELICIT_LOG_FILE, MULTI_ELICIT_JOBS)
- config.yaml in the working directory for solver settings
"""
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

from .errors import ConfigurationError
from .settings import SolverSettings, load_settings_from_yaml, try_load_settings_from_yaml

COMMANDS = ("verify", "witness", "frontier", "voronoi", "regress", "catalog")


class RunConfig(BaseModel):
    """
    Everything one CLI invocation needs, validated by Pydantic.

    Examples:
        # Direct instantiation
        RunConfig(command="verify", loss="variance2", property="variance", outcomes=[0, 1, 2, 3])

        # Flags merged over a config file
        RunConfig.from_sources("verify", {"resolution": 20}, config_file="run.json")
    """
    command: Literal["verify", "witness", "frontier", "voronoi", "regress", "catalog"]

    # Shared
    outcomes: Optional[List[float]] = Field(default=None, description="Outcome values; catalog defaults when omitted.")
    resolution: int = Field(default=10, ge=1, description="Simplex grid resolution N.")
    tol: float = Field(default=1e-3, description="Verification tolerance.")
    seed: int = Field(default=42, ge=0, description="Base seed for randomized runs.")
    out: Optional[str] = Field(default=None, description="Output path; stdout when omitted.")
    jobs: int = Field(default=1, ge=1, description="Worker threads for per-distribution or per-trial tasks.")
    verbose: bool = Field(default=False, description="Print progress to the console (stderr).")
    log_file: Optional[str] = Field(default=None, description="Append a plain-text session log here.")

    # verify / frontier / witness
    loss: Optional[str] = None
    property: Optional[str] = None
    max_d: int = Field(default=2, ge=1)
    max_m: int = Field(default=2, ge=1)
    m: int = Field(default=1, ge=1, description="Observation count of the witness search.")
    r1: Optional[float] = None
    r2: Optional[float] = None
    scan: Optional[int] = Field(default=None, ge=2, description="Line scan points or face grid resolution.")
    support: Optional[List[int]] = None
    level_tol: Optional[float] = None

    # voronoi
    sites: Optional[str] = Field(default=None, description="SiteSet JSON file.")
    bands: Optional[Literal["norm", "variance"]] = Field(default=None, description="Built-in band statistic.")
    thresholds: Optional[List[float]] = None
    site_m: int = Field(default=2, ge=1, description="Observation count for norm bands.")

    # regress
    a: Optional[float] = None
    n: Optional[int] = None
    trials: Optional[int] = None
    mode: Literal["sliding", "disjoint"] = "sliding"

    # Configuration sources
    config_file: Optional[str] = Field(
        default=None,
        description="JSON/YAML run file. Its solver sections (or a nested 'settings' key) configure the solvers."
    )
    settings: Optional[SolverSettings] = Field(default=None, description="Solver settings; resolved after validation.")

    @field_validator("tol", "level_tol")
    @classmethod
    def validate_positive(cls, v):
        """Tolerances must be strictly positive."""
        if v is not None and v <= 0:
            raise ValueError("tolerances must be > 0")
        return v

    @model_validator(mode="after")
    def setup_settings(self):
        """
        Resolves solver settings with the following priority:
        1. settings (if given directly)
        2. config_file
        3. config.yaml in the working directory
        4. Defaults
        """
        if self.settings is None and self.config_file is not None:
            self.settings = load_settings_from_yaml(self.config_file)
        if self.settings is None:
            self.settings = try_load_settings_from_yaml("config.yaml")
        if self.settings is None:
            self.settings = SolverSettings()
        return self

    @classmethod
    def from_sources(cls, command: str, flags: Dict[str, Any], config_file: Optional[str] = None) -> "RunConfig":
        """
        Merges environment defaults, the config file and flags (in that order).

        Args:
            command: Subcommand name.
            flags: Parsed flags; None values are treated as "not given".
            config_file: Optional JSON/YAML file with RunConfig keys.

        Raises:
            FileNotFoundError: If config_file does not exist.
            ConfigurationError: If the file is not a mapping.
        """
        load_dotenv()
        data: Dict[str, Any] = {}
        if os.getenv("MULTI_ELICIT_LOG_FILE"):
            data["log_file"] = os.getenv("MULTI_ELICIT_LOG_FILE")
        if os.getenv("MULTI_ELICIT_JOBS"):
            data["jobs"] = os.getenv("MULTI_ELICIT_JOBS")

        if config_file is not None:
            path = Path(config_file)
            if not path.exists():
                raise FileNotFoundError(f"Config file not found: {config_file}")
            with open(path, "r", encoding="utf-8") as f:
                document = yaml.safe_load(f) or {}
            if not isinstance(document, dict):
                raise ConfigurationError(f"Config file must contain a mapping: {config_file}")
            skip = {"command", "settings", "config_file"}
            data.update({k: v for k, v in document.items() if k in cls.model_fields and k not in skip})
            data["config_file"] = config_file

        data.update({k: v for k, v in flags.items() if v is not None and k in cls.model_fields})
        return cls(command=command, **data)

    def require(self, *names: str):
        """
        Raises:
            ConfigurationError: If any of the named options is unset.
        """
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            flags = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise ConfigurationError(f"'{self.command}' needs {flags}")
