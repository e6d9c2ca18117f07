"""
Run configuration for the command-line tools.

Sources, lowest to highest precedence:
- RunConfig defaults
- environment (loaded from .env): STRATCOUETTE_OUTPUT_DIR, STRATCOUETTE_LOG_LEVEL
- a flat key=value config file ('#' comments and blank lines ignored)
- key=value overrides from the command line
"""

import logging
import os
from pathlib import Path

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from stratcouette.backend.core_types import (
    FlowParams,
    GridSpec,
    InitialDataProfile,
    QuadratureSpec,
    derive_params,
    make_grid,
    make_initial_data,
    make_quadrature_spec,
)
from stratcouette.backend.errors import ConfigError, StratCouetteError
from stratcouette.backend.kernel import KernelContext

logger = logging.getLogger(__name__)

# load environment variables
load_dotenv()

ENV_PREFIX = "STRATCOUETTE_"
ENV_KEYS = {"output_dir": "OUTPUT_DIR", "log_level": "LOG_LEVEL"}

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _split_floats(v):
    if isinstance(v, str):
        v = [p for p in v.replace(";", ",").split(",") if p.strip()]
    return tuple(float(x) for x in v)


class RunConfig(BaseModel):
    """Every knob of one run; validated as a whole before anything is computed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # physics
    beta: float = 1.0
    m: int = 1

    # initial data
    data_kind: str = "gaussian"
    omega_amplitude: float = 1.0
    rho_amplitude: float = 0.0
    data_center: float = 0.0
    data_width: float = 1.0

    # grid
    y_min: float = -20.0
    y_max: float = 20.0
    n_points: int = 2049

    # quadrature (None: defaults scaled with m)
    eta_max: float | None = None
    xi_max: float | None = None
    delta0: float | None = None
    panels_per_decade: int = 4
    jacobi_order: int = 16
    filon_order: int = 16
    panel_width: float = 0.5
    legendre_order: int = 12
    table_spacing: float = 0.01
    tolerance: float = 1e-9
    check_refinement: bool = False

    # times: explicit list, or n_times log-spaced points in [t_min, t_max]
    times: tuple[float, ...] = ()
    t_min: float = 10.0
    t_max: float = 1000.0
    n_times: int = 12

    # reference solver and comparison
    dt: float = 0.01
    compare_tolerance: float = 1e-3

    # decay study
    quantities: tuple[str, ...] = ("ux", "uy", "rho")
    try_log: bool = True
    exponent_tolerance: float = 0.05

    # specfun table
    zeta_min: float = 0.05
    zeta_max: float = 30.0
    n_zeta: int = 64

    # limiting absorption checks
    lap_eps: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    lap_y0_extension: float = 0.0
    lap_tolerance: float = 2e-2
    lap_y: float = 0.5
    lap_y0: float = 0.0
    jump_eps: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    jump_etas: tuple[float, ...] = (0.1, 0.7, 3.0)

    # output
    output: str = "stratcouette"
    output_dir: str = "."
    output_format: str = "csv"
    log_level: str = "INFO"

    @field_validator("times", "lap_eps", "jump_eps", "jump_etas", mode="before")
    @classmethod
    def _parse_floats(cls, v):
        return _split_floats(v)

    @field_validator("quantities", mode="before")
    @classmethod
    def _parse_names(cls, v):
        if isinstance(v, str):
            v = [p.strip() for p in v.split(",") if p.strip()]
        return tuple(v)

    @field_validator("output_format")
    @classmethod
    def _check_format(cls, v: str) -> str:
        v = v.lower()
        if v not in ("csv", "json"):
            raise ValueError("output_format must be csv or json")
        return v

    @field_validator("log_level")
    @classmethod
    def _check_level(cls, v: str) -> str:
        v = v.upper()
        if v not in _LOG_LEVELS:
            raise ValueError(f"log_level must be one of {', '.join(_LOG_LEVELS)}")
        return v

    @model_validator(mode="after")
    def _check_run(self):
        # building every backend object runs its own preconditions
        params = self.params()
        self.initial_data()
        self.grid()
        self.quadrature(params)
        if any(t < 0 for t in self.times):
            raise ConfigError("times must be nonnegative", {"times": self.times})
        if not self.times and not (1.0 <= self.t_min < self.t_max and self.n_times >= 2):
            raise ConfigError("log-spaced times need 1 <= t_min < t_max and n_times >= 2",
                              {"t_min": self.t_min, "t_max": self.t_max, "n_times": self.n_times})
        unknown = [q for q in self.quantities if q not in ("ux", "uy", "rho", "psi")]
        if unknown:
            raise ConfigError("unknown decay quantity", {"quantities": unknown})
        if self.dt <= 0 or self.compare_tolerance <= 0 or self.lap_tolerance <= 0:
            raise ConfigError("dt and tolerances must be positive")
        if not 0 < self.zeta_min < self.zeta_max or self.n_zeta < 2:
            raise ConfigError("zeta table needs 0 < zeta_min < zeta_max and n_zeta >= 2")
        if any(e <= 0 for e in self.lap_eps + self.jump_eps):
            raise ConfigError("eps values must be positive")
        return self

    # -------------------------------------------------
    # Backend objects
    # -------------------------------------------------

    def params(self) -> FlowParams:
        return derive_params(self.beta, self.m)

    def initial_data(self) -> InitialDataProfile:
        return make_initial_data(self.data_kind, self.omega_amplitude, self.rho_amplitude,
                                 self.data_center, self.data_width)

    def grid(self) -> GridSpec:
        return make_grid(self.y_min, self.y_max, self.n_points)

    def quadrature(self, params: FlowParams | None = None) -> QuadratureSpec:
        return make_quadrature_spec(
            params or self.params(),
            eta_max=self.eta_max,
            xi_max=self.xi_max,
            delta0=self.delta0,
            panels_per_decade=self.panels_per_decade,
            jacobi_order=self.jacobi_order,
            filon_order=self.filon_order,
            panel_width=self.panel_width,
            legendre_order=self.legendre_order,
            table_spacing=self.table_spacing,
            tolerance=self.tolerance,
            check_refinement=self.check_refinement,
        )

    def context(self) -> KernelContext:
        return KernelContext(params=self.params(), data=self.initial_data())

    def time_list(self) -> list[float]:
        if self.times:
            return sorted(self.times)
        return [float(t) for t in np.geomspace(self.t_min, self.t_max, self.n_times)]

    def output_path(self, suffix: str) -> Path:
        return Path(self.output_dir) / f"{self.output}{suffix}"

    def resolved_items(self) -> list[tuple[str, str]]:
        """Full resolved configuration as ordered (key, value) strings."""
        items = []
        for name in type(self).model_fields:
            value = getattr(self, name)
            if isinstance(value, tuple):
                text = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            elif value is None:
                text = "default"
            else:
                text = str(value)
            items.append((name, text))
        return items


# -------------------------------------------------
# Loading
# -------------------------------------------------

def parse_pairs(lines, source: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment."""
    values = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected key=value", {"line": raw.rstrip()})
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{number}: empty key", {"line": raw.rstrip()})
        values[key] = value
    return values


def env_values() -> dict[str, str]:
    values = {}
    for field, suffix in ENV_KEYS.items():
        value = os.getenv(ENV_PREFIX + suffix)
        if value:
            values[field] = value
    return values


def load_config(path: str | os.PathLike | None = None, overrides=None) -> RunConfig:
    """Merge environment, config file and overrides into a validated RunConfig."""
    values: dict = env_values()
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}", {"error": str(e)}) from e
        values.update(parse_pairs(text.splitlines(), str(path)))
    if overrides:
        if isinstance(overrides, dict):
            values.update(overrides)
        else:
            values.update(parse_pairs(overrides, "command line"))

    unknown = sorted(set(values) - set(RunConfig.model_fields))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}", {"keys": unknown})

    try:
        config = RunConfig(**values)
    except ValidationError as e:
        errors = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ConfigError("invalid configuration: " + "; ".join(errors), {"errors": errors}) from e
    except ConfigError:
        raise
    except StratCouetteError as e:
        raise ConfigError(f"invalid configuration: {e.message}", e.details) from e

    logger.debug("resolved config: %s", dict(config.resolved_items()))
    return config
