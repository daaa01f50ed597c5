"""Run configuration for ricci-lab.

Configuration is described by pydantic models and stored as YAML. The
``ConfigManager`` discovers, loads, validates and writes configuration files.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ricci_lab.defaults import QUANTITIES
from ricci_lab.errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_EXTENSIONS = [".yaml", ".yml"]
CONFIG_FILE_NAMES = [".ricci-lab", "ricci-lab"]


class FlowConfig(BaseModel):
    """Step-size control and stopping rules for ``run_flow``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dt_initial: float = Field(default=1e-3, gt=0)
    safety: float = Field(default=0.5, gt=0, le=1)
    curvature_ceiling: float = Field(default=1e6, gt=0)
    t_max: float = Field(default=10.0, gt=0)
    output_stride: int = Field(default=1, ge=1)
    curvature_step_fraction: float = Field(default=0.1, gt=0)
    max_steps: int = Field(default=2_000_000, ge=1)


class GeometryConfig(BaseModel):
    """Initial metric: a round sphere or a warped profile file."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["sphere", "warped"] = "sphere"
    n: int = Field(default=3, ge=2)
    c0: float = Field(default=1.0, gt=0)
    profile: Optional[Path] = None

    @model_validator(mode="after")
    def _profile_for_warped(self) -> "GeometryConfig":
        if self.kind == "warped" and self.profile is None:
            raise ValueError("warped geometry requires a profile file")
        return self


def _check_quantity(value: str) -> str:
    if value not in QUANTITIES:
        raise ValueError(f"unknown quantity {value!r}; expected one of {QUANTITIES}")
    return value


class NormQueryConfig(BaseModel):
    """A space-time norm to evaluate after the run."""

    model_config = ConfigDict(extra="forbid")

    quantity: str = "R"
    alpha: float = Field(default=2.0, ge=1)
    interval: Optional[Tuple[float, float]] = None
    center: int = 0
    radius: Optional[float] = Field(default=None, gt=0)

    @field_validator("quantity")
    @classmethod
    def _known_quantity(cls, value: str) -> str:
        return _check_quantity(value)


class ScanConfig(BaseModel):
    """Exponents and epsilon ladder for the divergence scan."""

    model_config = ConfigDict(extra="forbid")

    quantity: str = "R"
    alphas: List[float] = Field(default_factory=lambda: [2.0, 2.5, 3.0])
    eps_sequence: Optional[List[float]] = None

    @field_validator("quantity")
    @classmethod
    def _known_quantity(cls, value: str) -> str:
        return _check_quantity(value)

    @field_validator("alphas")
    @classmethod
    def _alphas_at_least_one(cls, values: List[float]) -> List[float]:
        for alpha in values:
            if not (alpha >= 1 or math.isinf(alpha)):
                raise ValueError(f"alpha must be >= 1, got {alpha}")
        return values

    @field_validator("eps_sequence")
    @classmethod
    def _positive_decreasing(cls, values: Optional[List[float]]) -> Optional[List[float]]:
        if values is None:
            return values
        if any(v <= 0 for v in values):
            raise ValueError("eps values must be positive")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError("eps sequence must be strictly decreasing")
        return values


class RescaleConfig(BaseModel):
    """A parabolic rescaling experiment."""

    model_config = ConfigDict(extra="forbid")

    Q: float = Field(gt=0)
    t_center: float = 0.0
    interval: Tuple[float, float]

    @field_validator("interval")
    @classmethod
    def _ordered(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not value[0] < value[1]:
            raise ValueError("interval must satisfy a < b")
        return value


class RunConfig(BaseModel):
    """Everything a batch run needs."""

    model_config = ConfigDict(extra="forbid")

    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    flow: FlowConfig = Field(default_factory=FlowConfig)
    norms: List[NormQueryConfig] = Field(default_factory=list)
    scan: ScanConfig = Field(default_factory=ScanConfig)
    rescale: List[RescaleConfig] = Field(default_factory=list)
    output_dir: Path = Path("runs/latest")
    seed: int = 0


class ConfigManager:
    """Find, load, validate and save YAML run configurations."""

    def __init__(self, search_dir: Optional[Path] = None):
        self.search_dir = Path(search_dir) if search_dir else Path.cwd()

    def find_config_file(self) -> Optional[Path]:
        """Return the first configuration file found in the search directory."""
        for name in CONFIG_FILE_NAMES:
            for ext in CONFIG_EXTENSIONS:
                candidate = self.search_dir / f"{name}{ext}"
                if candidate.exists():
                    return candidate
        return None

    def load_config(self, path: Optional[Path] = None) -> RunConfig:
        """Load a configuration, falling back to defaults when no file exists.

        Raises:
            ConfigError: If the file cannot be parsed or fails validation.
        """
        config_path = Path(path) if path else self.find_config_file()
        if config_path is None:
            logger.debug("no configuration file found in %s; using defaults", self.search_dir)
            return self.create_default_config()
        data = self._load_yaml(config_path)
        try:
            return RunConfig(**data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration in {config_path}:\n{e}") from e

    def save_config(self, config: RunConfig, path: Optional[Path] = None) -> Path:
        """Write ``config`` as YAML and return the path written."""
        config_path = Path(path) if path else self.search_dir / "ricci-lab.yaml"
        if config_path.suffix not in CONFIG_EXTENSIONS:
            raise ConfigError(f"unsupported configuration extension: {config_path.suffix}")
        self._save_yaml(config_path, config.model_dump(mode="json"))
        return config_path

    def validate_file(self, path: Path) -> Tuple[bool, str]:
        """Validate a configuration file without raising."""
        try:
            self.load_config(path)
        except ConfigError as e:
            return False, str(e)
        return True, "Configuration is valid"

    def create_default_config(self) -> RunConfig:
        return RunConfig()

    def _load_yaml(self, path: Path) -> Dict[str, Any]:
        if not path.exists():
            raise ConfigError(f"configuration file not found: {path}")
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping at the top level")
        return data

    def _save_yaml(self, path: Path, data: Dict[str, Any]) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
