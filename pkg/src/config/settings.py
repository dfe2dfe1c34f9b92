"""
Configuration management for the flow laboratory.

A run is described by flat ``section.key = value`` lines (see
src/parsers/config_parser.py); this module holds the pydantic models those
lines are validated into, plus helpers to load and render them.
"""

from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Checks that only make sense for one codimension or one kind of data.
CODIM2_CHECKS = ("trS_min", "H_decay", "trS_barrier", "graph_bound", "relation", "trS_evolution")
CODIM1_CHECKS = ("codim1", "v_evolution")
LAGRANGIAN_CHECKS = ("lagrangian_residual", "A_decay_lagrangian", "lagrangian_barrier", "h_symmetry")
COMMON_CHECKS = ("pythagoras", "li_li", "gauss_bonnet", "soft_diffineq", "area_monotone", "decay_proxy")
CHECK_NAMES = CODIM2_CHECKS + CODIM1_CHECKS + LAGRANGIAN_CHECKS + COMMON_CHECKS


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Section):
    """Torus grid settings."""
    n1: int = Field(default=64, description="Grid points along x1")
    n2: int = Field(default=64, description="Grid points along x2")
    L1: float = Field(default=2 * np.pi, gt=0.0, description="Torus side length along x1")
    L2: float = Field(default=2 * np.pi, gt=0.0, description="Torus side length along x2")

    @field_validator("n1", "n2")
    @classmethod
    def validate_resolution(cls, v: int, info) -> int:
        if v < 8 or v % 2:
            raise ValueError(f"{info.field_name} must be even and >= 8")
        return v


class FourierMode(_Section):
    """One Fourier mode of the periodic perturbation: cos/sin amplitude per component."""
    k: Tuple[int, int] = Field(..., description="Integer wave numbers (k1, k2)")
    cos: List[float] = Field(default_factory=list, description="Cosine amplitude per component")
    sin: List[float] = Field(default_factory=list, description="Sine amplitude per component")


class PotentialMode(_Section):
    """One Fourier mode of a scalar potential."""
    k: Tuple[int, int] = Field(..., description="Integer wave numbers (k1, k2)")
    cos: float = Field(default=0.0, description="Cosine amplitude")
    sin: float = Field(default=0.0, description="Sine amplitude")


class MapConfig(_Section):
    """Initial map settings."""
    kind: Literal["affine+fourier", "potential", "snapshot-file"] = Field(
        default="affine+fourier", description="How the initial map is built"
    )
    codim: Literal[1, 2] = Field(default=2, description="Target dimension m")
    affine: Optional[List[List[float]]] = Field(default=None, description="m x 2 linear part")
    offset: Optional[List[float]] = Field(default=None, description="Constant part (length m)")
    modes: List[FourierMode] = Field(default_factory=list, description="Explicit Fourier modes")
    random_cutoff: int = Field(default=0, ge=0, description="Max |k| of seeded random modes (0 = none)")
    random_amplitude: float = Field(default=0.0, ge=0.0, description="Amplitude budget of random modes")
    normalize: bool = Field(default=False, description="Rescale the map to be area decreasing")
    Q: Optional[List[List[float]]] = Field(default=None, description="Quadratic part of the potential")
    potential_modes: List[PotentialMode] = Field(default_factory=list, description="Potential Fourier modes")
    path: Optional[str] = Field(default=None, description="Snapshot file (snapshot-file kind)")


class FlowConfig(_Section):
    """Time stepping settings."""
    t_end: float = Field(..., gt=0.0, description="Final flow time")
    cfl: float = Field(default=0.5, gt=0.0, le=1.0, description="Fraction of the RK4 stability limit")
    snapshot_every: float = Field(default=0.1, gt=0.0, description="Time between monitor snapshots")
    max_steps: int = Field(default=1_000_000, ge=0, description="Hard cap on the number of steps")


class ChecksConfig(_Section):
    """Estimate monitor settings."""
    enabled: Optional[List[str]] = Field(default=None, description="Checks to run (default: all applicable)")
    rel_tol: float = Field(default=0.02, ge=0.0, description="Relative slack for bound checks")
    id_tol: float = Field(default=1e-8, gt=0.0, description="Tolerance for pointwise identities")
    alpha_margin: float = Field(default=0.1, gt=0.0, lt=1.0, description="Area-decreasing margin for rescaling")
    gauss_tol: float = Field(default=1e-6, gt=0.0, description="Relative tolerance of the Gauss formula check")
    v_step_tol: float = Field(default=1e-6, ge=0.0, description="Absolute per-step slack for sup v")
    trs_step_tol: float = Field(default=1e-4, ge=0.0, description="Relative per-step slack for inf Tr(S)")
    evo_coeff: float = Field(default=10.0, gt=0.0, description="dt coefficient of evolution-residual tolerances")
    diffineq_slack: float = Field(default=1e-6, ge=0.0, description="Discretization slack of sup-rate checks")
    delta: float = Field(default=1.0, gt=0.0, description="Decay estimate parameter delta")
    epsilon: float = Field(default=1.0, gt=0.0, description="Decay estimate parameter epsilon")

    @field_validator("enabled")
    @classmethod
    def validate_enabled(cls, v: Optional[List[str]]) -> Optional[List[str]]:
        if v is None:
            return v
        unknown = [name for name in v if name not in CHECK_NAMES]
        if unknown:
            raise ValueError(f"unknown checks: {', '.join(unknown)}")
        return v

    @model_validator(mode="after")
    def validate_decay_parameters(self) -> "ChecksConfig":
        # 2 * epsilon / n with n = 2
        if self.delta > self.epsilon:
            raise ValueError("delta must satisfy 0 < delta <= 2*epsilon/n with n = 2")
        return self


class OutputConfig(_Section):
    """Output settings."""
    directory: str = Field(default="outputs", description="Directory for run artifacts")
    formats: List[Literal["csv", "json", "snapshot"]] = Field(
        default_factory=lambda: ["csv", "json"], description="Artifacts to write"
    )


class LoggingConfig(_Section):
    """Logging configuration."""
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(default="INFO", description="Log level")
    format: Literal["rich", "standard"] = Field(default="rich", description="Log format")
    file: Optional[str] = Field(default=None, description="Optional log file path")


class LoggingOverrides(BaseSettings):
    """GMCF_LOG_* environment variables, applied on top of LoggingConfig."""
    model_config = SettingsConfigDict(env_prefix="GMCF_LOG_")

    level: Optional[Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]] = None
    format: Optional[Literal["rich", "standard"]] = None
    file: Optional[str] = None


class RunConfig(_Section):
    """Main configuration class."""
    grid: GridConfig = Field(default_factory=GridConfig)
    map: MapConfig = Field(default_factory=MapConfig)
    flow: FlowConfig
    checks: ChecksConfig = Field(default_factory=ChecksConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    seed: int = Field(default=0, ge=0, description="Seed for randomized initial data")

    @model_validator(mode="after")
    def validate_consistency(self) -> "RunConfig":
        problems = []
        m = self.map.codim
        kind = self.map.kind

        if self.map.affine is not None:
            if len(self.map.affine) != m or any(len(row) != 2 for row in self.map.affine):
                problems.append(f"map.affine must be a {m} x 2 matrix for codim {m}")
        if self.map.offset is not None and len(self.map.offset) != m:
            problems.append(f"map.offset must have {m} entries for codim {m}")
        for mode in self.map.modes:
            for name in ("cos", "sin"):
                coeffs = getattr(mode, name)
                if coeffs and len(coeffs) != m:
                    problems.append(f"map.modes k={list(mode.k)}: {name} must have {m} entries")

        all_modes = [mode.k for mode in self.map.modes] + [mode.k for mode in self.map.potential_modes]
        for k1, k2 in all_modes:
            if abs(k1) >= self.grid.n1 // 2 or abs(k2) >= self.grid.n2 // 2:
                problems.append(f"mode k=({k1}, {k2}) is not resolved by the grid")
        if self.map.random_cutoff and self.map.random_cutoff >= min(self.grid.n1, self.grid.n2) // 2:
            problems.append("map.random_cutoff is not resolved by the grid")

        if kind == "potential":
            if m != 2:
                problems.append("map.kind = potential requires codim 2")
            if not np.isclose(self.grid.L1, self.grid.L2, rtol=0.0, atol=1e-12):
                problems.append("map.kind = potential requires a square torus (L1 = L2)")
            if self.map.Q is not None:
                Q = np.asarray(self.map.Q, dtype=float)
                if Q.shape != (2, 2):
                    problems.append("map.Q must be a 2 x 2 matrix")
                elif not np.allclose(Q, Q.T, rtol=0.0, atol=1e-14):
                    problems.append("map.Q must be symmetric")
        if kind == "snapshot-file" and not self.map.path:
            problems.append("map.kind = snapshot-file requires map.path")

        for name in self.checks.enabled or []:
            if m == 1 and (name in CODIM2_CHECKS or name in LAGRANGIAN_CHECKS):
                problems.append(f"check {name} requires codim 2")
            if m == 2 and name in CODIM1_CHECKS:
                problems.append(f"check {name} requires codim 1")

        if problems:
            raise ValueError("; ".join(problems))
        return self

    def enabled_checks(self) -> List[str]:
        """Checks to run: the configured list or every check applicable to this map."""
        if self.checks.enabled is not None:
            return list(self.checks.enabled)
        if self.map.codim == 1:
            return list(CODIM1_CHECKS + COMMON_CHECKS)
        names = list(CODIM2_CHECKS + COMMON_CHECKS)
        if self.map.kind == "potential":
            names += list(LAGRANGIAN_CHECKS)
        return names


def load_config(config_path: str) -> RunConfig:
    """
    Load configuration from a key=value file.

    Args:
        config_path: Path to configuration file

    Returns:
        Validated configuration object

    Raises:
        FileNotFoundError: If config file doesn't exist
        ConfigError: If config is invalid
    """
    from src.parsers.config_parser import parse_config

    config_file = Path(config_path)
    if not config_file.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")
    return parse_config(config_file.read_text(encoding="utf-8"))


def _render_value(value) -> str:
    text = yaml.safe_dump(value, default_flow_style=True, width=1 << 30, sort_keys=False).strip()
    if text.endswith("\n..."):
        text = text[: -len("\n...")]
    return text


def dump_config(config: RunConfig) -> str:
    """
    Render a configuration back to key=value text that parse_config accepts.

    Args:
        config: Configuration object

    Returns:
        One ``section.key = value`` line per non-null setting
    """
    lines = []
    for section, values in config.model_dump().items():
        if not isinstance(values, dict):
            lines.append(f"{section} = {_render_value(values)}")
            continue
        for key, value in values.items():
            if value is None:
                continue
            lines.append(f"{section}.{key} = {_render_value(_plain(value))}")
    return "\n".join(lines) + "\n"


def save_config(config: RunConfig, config_path: str) -> None:
    """
    Save configuration to a key=value file.

    Args:
        config: Configuration object
        config_path: Path to save configuration
    """
    Path(config_path).parent.mkdir(parents=True, exist_ok=True)
    Path(config_path).write_text(dump_config(config), encoding="utf-8")


def _plain(value):
    """Tuples to lists, recursively, so yaml.safe_dump accepts the value."""
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value
