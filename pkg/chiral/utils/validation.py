"""
Run configuration: the pydantic model every command validates against, the parsers for the
grid and list options, and the JSON config-file loader.
"""

import json
import logging
import math

from typing import Dict, List, Literal, Optional

import click
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from chiral.config.const import (
    DEFAULT_DEGENERACY_TOL,
    DEFAULT_DISORDER_SAMPLES,
    DEFAULT_LOG_LEVEL,
    DEFAULT_SEED,
    DEFAULT_SINGLE_GRID,
    DEFAULT_SPECTRUM_GRID,
    DEFAULT_TWO_GRID,
    DEFAULT_WORKERS,
    INFINITE,
    Command,
    OutputFormat,
    SweepParameter,
)
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import ConfigError, InvalidParameter
from chiral.model import EmitterArray, Grid

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)

DEFAULT_GRIDS = {
    Command.SINGLE: DEFAULT_SINGLE_GRID,
    Command.TWO: DEFAULT_TWO_GRID,
    Command.DISORDER: DEFAULT_TWO_GRID,
    Command.SWEEP: DEFAULT_TWO_GRID,
    Command.SPECTRUM: DEFAULT_SPECTRUM_GRID,
}

# Parameters echoed into the header of each command's data file. Output path, format and the
# worker count are left out so that the file only depends on the physics and the seed.
ECHO_FIELDS = {
    Command.SINGLE: ("m", "detunings", "couplings", "delta", "sigma", "center", "grid", "delta_input"),
    Command.TWO: ("m", "detunings", "delta", "sigma", "mu", "grid", "form"),
    Command.DISORDER: ("m", "Sigma", "delta", "sigma", "samples", "seed", "constrain_mean", "grid"),
    Command.SWEEP: ("m", "detunings", "delta", "sigma", "grid", "param", "values", "d_min"),
    Command.VALIDATE: ("filter", "seed", "tolerances"),
    Command.SPECTRUM: ("m", "detunings", "couplings", "grid"),
}


def parse_grid(value) -> Grid:
    """
    Parses "start:stop:n" (or a [start, stop, n] sequence) into a Grid.
    """
    if isinstance(value, Grid):
        return value
    if isinstance(value, str):
        parts = value.split(":")
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise InvalidParameter(f"Expected a grid as start:stop:n, got {value!r}")
    if len(parts) != 3:
        raise InvalidParameter(f"Expected a grid as start:stop:n, got {value!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        n_points = float(parts[2])
    except (TypeError, ValueError):
        raise InvalidParameter(f"Grid {value!r} must contain numbers")
    if not n_points.is_integer():
        raise InvalidParameter(f"Grid point count must be an integer, got {parts[2]!r}")
    return Grid(start, stop, int(n_points))


def parse_float_list(value):
    if isinstance(value, str):
        items = [item for item in value.split(",") if item.strip()]
    else:
        items = list(value)
    try:
        return tuple(float(item) for item in items)
    except (TypeError, ValueError):
        raise InvalidParameter(f"Expected comma-separated numbers, got {value!r}")


class GridParamType(click.ParamType):
    name = "start:stop:n"

    def convert(self, value, param, ctx):
        try:
            return parse_grid(value)
        except InvalidParameter as e:
            self.fail(str(e), param, ctx)


class FloatListParamType(click.ParamType):
    name = "v1,v2,..."

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            return parse_float_list(value)
        except InvalidParameter as e:
            self.fail(str(e), param, ctx)


class ToleranceParamType(click.ParamType):
    name = "criterion=value"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        name, separator, number = str(value).partition("=")
        try:
            if not separator or not name:
                raise ValueError
            return name.strip(), float(number)
        except ValueError:
            self.fail(f"Expected criterion=value, got {value!r}", param, ctx)


GRID = GridParamType()
FLOAT_LIST = FloatListParamType()
TOLERANCE = ToleranceParamType()


class RunConfig(BaseModel):
    """
    Validated parameters of one CLI run, all in units of κ. Unknown keys are rejected.
    """

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    command: Command
    m: int = Field(1, ge=0, description="Number of emitters")
    detunings: Optional[List[float]] = Field(None, description="Explicit detunings, overrides m")
    couplings: Optional[List[float]] = Field(None, description="Per-emitter couplings")
    delta: float = Field(0.0, description="Carrier detuning from the mean emitter frequency")
    sigma: float = Field(2.0, gt=0, allow_inf_nan=False, description="Packet width")
    center: float = Field(0.0, allow_inf_nan=False)
    mu: float = Field(INFINITE, gt=0, description="Center-of-mass width, inf for the wide-pulse limit")
    Sigma: float = Field(0.0, ge=0, allow_inf_nan=False, description="Detuning disorder strength")
    samples: int = Field(DEFAULT_DISORDER_SAMPLES, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2**64)
    constrain_mean: bool = False
    workers: int = Field(DEFAULT_WORKERS, ge=1)
    degeneracy_tol: float = Field(DEFAULT_DEGENERACY_TOL, gt=0)
    grid: Optional[Grid] = None
    form: Literal["single", "double"] = "single"
    delta_input: bool = False
    param: Optional[SweepParameter] = None
    values: Optional[List[float]] = None
    d_min: float = Field(8.0, gt=0)
    filter: Optional[str] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV

    @field_validator("grid", mode="before")
    @classmethod
    def _parse_grid(cls, value):
        if value is None:
            return value
        return parse_grid(value)

    @field_validator("delta")
    @classmethod
    def _finite_delta(cls, value):
        if not math.isfinite(value):
            raise ValueError("delta must be finite")
        return value

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.grid is None and self.command in DEFAULT_GRIDS:
            self.grid = Grid(*DEFAULT_GRIDS[self.command])
        if self.couplings is not None and self.detunings is None:
            raise ValueError("couplings need explicit detunings")
        if self.command == Command.SWEEP and (self.param is None or not self.values):
            raise ValueError("sweep needs param and a non-empty list of values")
        if self.command in (Command.SINGLE, Command.TWO, Command.SWEEP, Command.SPECTRUM):
            # Re-runs the emitter invariants (lengths, finiteness, positive couplings)
            self.emitters()
        return self

    def emitters(self) -> EmitterArray:
        if self.detunings is not None:
            return EmitterArray(tuple(self.detunings), self.couplings, self.degeneracy_tol)
        return EmitterArray.degenerate(self.m, degeneracy_tol=self.degeneracy_tol)

    def echo(self) -> Dict[str, object]:
        """Parameters written into the data-file header, in a fixed order."""
        parameters = {"command": str(self.command)}
        for name in ECHO_FIELDS.get(self.command, ()):
            value = getattr(self, name)
            if name == "m" and self.detunings is not None:
                value = len(self.detunings)
            if isinstance(value, (list, tuple)):
                value = ",".join(repr(float(item)) for item in value)
            elif isinstance(value, dict):
                value = ",".join(f"{key}={value[key]!r}" for key in sorted(value))
            elif value is not None and not isinstance(value, (bool, int, float, str)):
                value = str(value)
            parameters[name] = value
        return parameters


def describe_validation_error(error: ValidationError) -> str:
    """One 'field: message' entry per failed field."""
    messages = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        messages.append(f"{location}: {item['msg']}")
    return "; ".join(messages)


def build_run_config(command: Command, params) -> RunConfig:
    """Validates the parameters click collected for a command."""
    values = {key: value for key, value in params.items() if value is not None}
    if "tolerances" in values:
        values["tolerances"] = dict(values["tolerances"])
    for name in ("detunings", "couplings", "values"):
        if name in values:
            values[name] = list(values[name])
    try:
        return RunConfig.model_validate({"command": command, **values})
    except ValidationError as e:
        raise ConfigError(describe_validation_error(e))


def _default_map_value(key, value):
    if key == "tolerances":
        return [f"{name}={number!r}" for name, number in value.items()]
    return value


def load_config_file(path, command: Command) -> Dict[str, object]:
    """
    Reads a JSON object of run parameters and returns it as a click default map for the command.

    Raises:
        ConfigError: unreadable JSON (with line and column), unknown keys, invalid values or a
            "command" entry naming a different command.
    """
    try:
        with open(path, encoding="utf-8") as file:
            data = json.load(file)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object of parameters")
    data = dict(data)
    named = data.pop("command", None)
    if named is not None and named != str(command):
        raise ConfigError(f"{path}: command: the file is for {named!r}, not {str(command)!r}")
    try:
        RunConfig.model_validate({"command": command, **data})
    except ValidationError as e:
        raise ConfigError(f"{path}: {describe_validation_error(e)}")
    logger.info("Loaded config file: path=%s, command=%s, keys=%s", path, command, sorted(data))
    return {key: _default_map_value(key, value) for key, value in data.items()}
