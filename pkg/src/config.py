"""Run configuration: the flat `section.key = value` format and its validated model."""

import logging
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import ConfigurationError
from src.initial_data import DataSpec
from src.potential import PotentialSpec

logger = logging.getLogger(__name__)

REQUIRED_KEYS = (
    "domain.L",
    "domain.n",
    "time.dt",
    "time.T",
    "potential.family",
    "potential.V0",
    "potential.alpha",
)


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DomainConfig(Section):
    L: float = Field(gt=0.0)
    n: int = Field(ge=3)
    bc: Literal["dirichlet", "periodic"] = "dirichlet"


class TimeConfig(Section):
    dt: float = Field(gt=0.0)
    T: float = Field(gt=0.0)
    sample_every: int = Field(default=50, ge=1)


class FlagsConfig(Section):
    antiderivative_check: bool = False
    appendix_checks: bool = False
    semigroup_rhs: bool = False


class OutputConfig(Section):
    csv_path: str = "trace.csv"
    svg_path: Optional[str] = None
    report_path: str = "report.txt"
    report_csv_path: Optional[str] = None
    sweep_csv_path: str = "sweep.csv"

    @property
    def resolved_report_csv_path(self) -> Path:
        if self.report_csv_path:
            return Path(self.report_csv_path)
        return Path(self.report_path).with_suffix(".csv")


class FitConfig(Section):
    t_min: float = Field(default=10.0, ge=0.0)
    t_max: Optional[float] = None


class VerifyConfig(Section):
    tol: float = Field(default=1e-6, ge=0.0)
    energy_tol: float = Field(default=1e-8, gt=0.0)


class SweepConfig(Section):
    """Lists of sweep values. An empty list keeps the base configuration's value."""

    V0: list[float] = []
    alpha: list[float] = []
    amplitude: list[float] = []
    baseline: bool = False

    @field_validator("V0", "alpha", "amplitude", mode="before")
    @classmethod
    def wrap_scalar(cls, value):
        if isinstance(value, (str, int, float)):
            return [value]
        return value


class RunConfig(Section):
    domain: DomainConfig
    time: TimeConfig
    potential: PotentialSpec
    data: DataSpec = DataSpec()
    flags: FlagsConfig = FlagsConfig()
    output: OutputConfig = OutputConfig()
    fit: FitConfig = FitConfig()
    verify: VerifyConfig = VerifyConfig()
    sweep: SweepConfig = SweepConfig()

    def updated(self, section: str, **values) -> "RunConfig":
        """Returns a validated copy with some keys of one section replaced."""
        data = self.model_dump()
        data[section].update(values)
        return RunConfig.model_validate(data)


def parse_config_text(text: str, source: str = "<config>") -> tuple[dict, dict[str, int]]:
    """
    Parses `section.key = value` lines into a nested mapping.

    Args:
        text (str): File contents.
        source (str): Name used in diagnostics.

    Returns:
        tuple: (nested mapping of raw string values, key -> line number). Values
        containing commas become lists of strings.
    """
    tree: dict = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'section.key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        parts = key.split(".")
        if len(parts) != 2 or not all(parts):
            raise ConfigurationError(f"{source}:{lineno}: key {key!r} is not of the form section.key")
        if not value:
            raise ConfigurationError(f"{source}:{lineno}: empty value for {key}")
        if key in lines:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key} (first set on line {lines[key]})")

        section, name = parts
        if "," in value:
            value = [item.strip() for item in value.split(",") if item.strip()]
        tree.setdefault(section, {})[name] = value
        lines[key] = lineno
        lines.setdefault(section, lineno)
    return tree, lines


def _describe(error: dict, lines: dict[str, int], source: str) -> str:
    loc = [str(part) for part in error["loc"]]
    key = ".".join(loc[:2])
    lineno = lines.get(key, lines.get(loc[0]) if loc else None)
    where = f"{source}:{lineno}" if lineno else source
    return f"{where}: {key}: {error['msg']}"


def build_config(tree: dict, lines: dict[str, int], source: str = "<config>") -> RunConfig:
    """
    Validates a parsed mapping into a RunConfig.

    Raises:
        ConfigurationError: On a missing required key or an invalid value, naming the line.
    """
    for key in REQUIRED_KEYS:
        if key not in lines:
            raise ConfigurationError(f"{source}: missing required key {key}")
    try:
        return RunConfig.model_validate(tree)
    except ValidationError as e:
        messages = [_describe(error, lines, source) for error in e.errors()]
        raise ConfigurationError("\n".join(messages)) from e


def load_config(path: str | Path) -> RunConfig:
    """
    Reads and validates a run configuration file.

    Args:
        path (str | Path): Path to the UTF-8 config file.

    Returns:
        RunConfig: The validated configuration.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"Cannot read config {path}: {e}") from e
    tree, lines = parse_config_text(text, source=str(path))
    config = build_config(tree, lines, source=str(path))
    logger.debug("Loaded config %s", path)
    return config
