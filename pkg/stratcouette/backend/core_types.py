"""
Shared domain types for the stratified Couette toolkit.

This module contains the value objects every other module works with:
- FlowParams (beta, m and the derived Whittaker index gamma)
- closed-form initial data profiles with analytic derivatives
- grids, sampled complex fields and quadrature parameters
"""

import cmath
import logging
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Self

from stratcouette.backend.errors import DomainError

logger = logging.getLogger(__name__)

# |gamma| below this is treated as the logarithmic case gamma = 0
DEGENERACY_THRESHOLD = 1e-8

# profiles and derivatives are below this (relative) outside support_radius()
SUPPORT_FLOOR = 1e-17


# -------------------------------------------------
# Flow parameters
# -------------------------------------------------

class FlowParams(BaseModel):
    """
    Physical and spectral parameters of one x-mode.
    gamma = sqrt(1/4 - beta^2) on the principal branch.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    beta: float
    m: int
    gamma: complex
    mu: float
    nu: float

    @model_validator(mode="after")
    def _check_invariants(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError("beta must be a positive finite real", {"beta": self.beta})
        if self.m < 1:
            raise DomainError("wavenumber m must be >= 1", {"m": self.m})
        residual = abs(self.gamma * self.gamma + self.beta ** 2 - 0.25)
        if residual > 1e-12 * max(1.0, self.beta ** 2):
            raise DomainError("gamma^2 + beta^2 != 1/4", {"residual": residual})
        return self

    @property
    def beta2(self) -> float:
        return self.beta ** 2

    @property
    def is_log_case(self) -> bool:
        return self.gamma == 0

    @property
    def cos_gamma_pi(self) -> complex:
        return cmath.cos(self.gamma * math.pi)

    @property
    def regime(self) -> str:
        if self.gamma == 0:
            return "critical"
        return "real" if self.nu == 0 else "imaginary"


def derive_params(beta: float, m: int) -> FlowParams:
    """Build FlowParams from (beta, m), snapping |gamma| < 1e-8 to exactly 0."""
    if isinstance(beta, bool) or not isinstance(beta, (int, float)) or not math.isfinite(beta) or beta <= 0:
        raise DomainError("beta must be a positive finite real", {"beta": beta})
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError("wavenumber m must be an integer >= 1", {"m": m})

    beta = float(beta)
    gamma = cmath.sqrt(complex(0.25 - beta * beta, 0.0))
    if abs(gamma) < DEGENERACY_THRESHOLD:
        gamma = 0j
    # purely real or purely imaginary by construction
    if gamma.imag == 0:
        gamma = complex(gamma.real, 0.0)
    else:
        gamma = complex(0.0, gamma.imag)

    params = FlowParams(beta=beta, m=int(m), gamma=gamma, mu=gamma.real, nu=gamma.imag)
    logger.debug("derived params beta=%s m=%s gamma=%s", beta, m, gamma)
    return params


# -------------------------------------------------
# Initial data profiles
# -------------------------------------------------

class ProfileKind(str, Enum):
    GAUSSIAN = "gaussian"
    BUMP = "bump"
    SECH2 = "sech2"


def _gaussian_derivatives(s: np.ndarray) -> list[np.ndarray]:
    f = np.exp(-s * s)
    s2 = s * s
    return [
        f,
        -2.0 * s * f,
        (4.0 * s2 - 2.0) * f,
        (-8.0 * s2 * s + 12.0 * s) * f,
        (16.0 * s2 * s2 - 48.0 * s2 + 12.0) * f,
    ]


def _bump_derivatives(s: np.ndarray) -> list[np.ndarray]:
    # exp(1/(s^2-1)) underflows to 0 once 1 - s^2 < 1e-3
    inside = (1.0 - s * s) > 1e-3
    q = np.where(inside, s * s - 1.0, -1.0)
    f = np.where(inside, np.exp(1.0 / q), 0.0)
    p1 = -2.0 * s / q ** 2
    p2 = (6.0 * s * s + 2.0) / q ** 3
    p3 = -24.0 * s * (s * s + 1.0) / q ** 4
    p4 = 24.0 * (5.0 * s ** 4 + 10.0 * s * s + 1.0) / q ** 5
    return [
        f,
        p1 * f,
        (p2 + p1 ** 2) * f,
        (p3 + 3.0 * p1 * p2 + p1 ** 3) * f,
        (p4 + 4.0 * p1 * p3 + 3.0 * p2 ** 2 + 6.0 * p1 ** 2 * p2 + p1 ** 4) * f,
    ]


def _sech2_derivatives(s: np.ndarray) -> list[np.ndarray]:
    t = np.tanh(s)
    sech2 = 1.0 / np.cosh(np.clip(s, -350.0, 350.0)) ** 2
    t2 = t * t
    return [
        sech2,
        -2.0 * t * sech2,
        sech2 * (6.0 * t2 - 2.0),
        sech2 * (16.0 * t - 24.0 * t2 * t),
        sech2 * (120.0 * t2 * t2 - 120.0 * t2 + 16.0),
    ]


_PROFILE_TABLE = {
    ProfileKind.GAUSSIAN: (_gaussian_derivatives, 8.0),
    ProfileKind.BUMP: (_bump_derivatives, 1.0),
    ProfileKind.SECH2: (_sech2_derivatives, 23.0),
}


class Profile(BaseModel):
    """
    A closed-form scalar profile  amplitude * f((y - center) / width).
    Derivatives up to order 4 are analytic.
    """

    model_config = ConfigDict(frozen=True)

    kind: ProfileKind = ProfileKind.GAUSSIAN
    amplitude: float = 1.0
    center: float = 0.0
    width: float = Field(default=1.0, gt=0.0)

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    def derivatives(self, y, order: int = 4) -> np.ndarray:
        """
        Return an array of shape (order+1, *y.shape) holding d^k/dy^k, k = 0..order.
        """
        if not 0 <= order <= 4:
            raise DomainError("profile derivatives are available up to order 4", {"order": order})
        y = np.asarray(y, dtype=float)
        out = np.zeros((order + 1,) + y.shape)
        if self.is_zero:
            return out
        func, _ = _PROFILE_TABLE[self.kind]
        s = (y - self.center) / self.width
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            derivs = func(s)
        for k in range(order + 1):
            out[k] = self.amplitude * derivs[k] / self.width ** k
        return out

    def __call__(self, y) -> np.ndarray:
        return self.derivatives(y, order=0)[0]

    def support_radius(self) -> float:
        """Distance from center beyond which all derivatives are negligible."""
        return _PROFILE_TABLE[self.kind][1] * self.width

    def support(self) -> tuple[float, float]:
        r = self.support_radius()
        return self.center - r, self.center + r

    def scaled(self, factor: float) -> Self:
        return self.model_copy(update={"amplitude": self.amplitude * factor})


ZERO_PROFILE = Profile(amplitude=0.0)


class InitialDataProfile(BaseModel):
    """
    Initial vorticity and density of mode m: omega0 and rho0.
    """

    model_config = ConfigDict(frozen=True)

    omega0: Profile = ZERO_PROFILE
    rho0: Profile = ZERO_PROFILE

    @property
    def is_zero(self) -> bool:
        return self.omega0.is_zero and self.rho0.is_zero

    @property
    def kind(self) -> ProfileKind:
        return self.rho0.kind if self.omega0.is_zero else self.omega0.kind

    def support(self) -> tuple[float, float]:
        """Smallest interval outside which both profiles are negligible."""
        parts = [p.support() for p in (self.omega0, self.rho0) if not p.is_zero]
        if not parts:
            return 0.0, 0.0
        return min(a for a, _ in parts), max(b for _, b in parts)

    def scaled(self, factor: float) -> "InitialDataProfile":
        return InitialDataProfile(omega0=self.omega0.scaled(factor), rho0=self.rho0.scaled(factor))


def make_initial_data(
    kind: str | ProfileKind = ProfileKind.GAUSSIAN,
    omega_amplitude: float = 1.0,
    rho_amplitude: float = 0.0,
    center: float = 0.0,
    width: float = 1.0,
) -> InitialDataProfile:
    """Same shape for omega0 and rho0, independent amplitudes."""
    try:
        kind = ProfileKind(kind)
    except ValueError as e:
        raise DomainError(f"unknown profile kind: {kind}", {"kind": kind}) from e
    if not width > 0:
        raise DomainError("profile width must be positive", {"width": width})
    return InitialDataProfile(
        omega0=Profile(kind=kind, amplitude=omega_amplitude, center=center, width=width),
        rho0=Profile(kind=kind, amplitude=rho_amplitude, center=center, width=width),
    )


# -------------------------------------------------
# Grids and sampled fields
# -------------------------------------------------

class GridSpec(BaseModel):
    """Uniform grid on the truncated domain [y_min, y_max]."""

    model_config = ConfigDict(frozen=True)

    y_min: float = -20.0
    y_max: float = 20.0
    n_points: int = 2049

    @model_validator(mode="after")
    def _check_grid(self):
        if not self.y_min < self.y_max:
            raise DomainError("grid needs y_min < y_max", {"y_min": self.y_min, "y_max": self.y_max})
        if self.n_points < 16:
            raise DomainError("grid needs at least 16 points", {"n_points": self.n_points})
        return self

    @property
    def spacing(self) -> float:
        return (self.y_max - self.y_min) / (self.n_points - 1)

    @property
    def y_abs_max(self) -> float:
        return max(abs(self.y_min), abs(self.y_max))

    def nodes(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n_points)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(y_min=self.y_min, y_max=self.y_max, n_points=factor * (self.n_points - 1) + 1)


def make_grid(y_min: float = -20.0, y_max: float = 20.0, n_points: int = 2049) -> GridSpec:
    return GridSpec(y_min=y_min, y_max=y_max, n_points=n_points)


class ComplexField(BaseModel):
    """A complex function of y sampled on a grid at a given time."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex_array(cls, v):
        arr = np.array(v, dtype=complex)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check_length(self):
        if self.values.shape != (self.grid.n_points,):
            raise DomainError(
                "field length does not match grid",
                {"length": self.values.shape, "n_points": self.grid.n_points},
            )
        return self

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes()

    def conjugate(self) -> "ComplexField":
        return ComplexField(grid=self.grid, values=np.conj(self.values), time=self.time)


# -------------------------------------------------
# Quadrature parameters
# -------------------------------------------------

class QuadratureSpec(BaseModel):
    """
    Truncation, grading and panel-order parameters for the singular
    oscillatory integrals.
    """

    model_config = ConfigDict(frozen=True)

    eta_max: float
    xi_max: float
    delta0: float
    panels_per_decade: int = 4
    jacobi_order: int = 16
    filon_order: int = 16
    # smooth (non-singular, non-oscillatory) inner panels
    panel_width: float = 0.5
    legendre_order: int = 12
    # s-spacing of the tabulated inner integrals
    table_spacing: float = 0.01
    tolerance: float = 1e-9
    check_refinement: bool = False

    @model_validator(mode="after")
    def _check_spec(self):
        if not self.delta0 > 0:
            raise DomainError("delta0 must be positive", {"delta0": self.delta0})
        if not (self.eta_max > self.delta0 and self.xi_max > self.delta0):
            raise DomainError(
                "truncations must exceed delta0",
                {"eta_max": self.eta_max, "xi_max": self.xi_max, "delta0": self.delta0},
            )
        for name in ("jacobi_order", "filon_order", "legendre_order"):
            if getattr(self, name) < 2:
                raise DomainError(f"{name} must be >= 2", {name: getattr(self, name)})
        if self.panels_per_decade < 1:
            raise DomainError("panels_per_decade must be >= 1", {"panels_per_decade": self.panels_per_decade})
        if not (self.panel_width > 0 and self.table_spacing > 0 and self.tolerance > 0):
            raise DomainError("panel_width, table_spacing and tolerance must be positive")
        return self

    def validate_for(self, params: FlowParams) -> Self:
        if self.delta0 > 1.0 / (2 * params.m) * (1 + 1e-12):
            raise DomainError(
                "delta0 must not exceed 1/(2m)", {"delta0": self.delta0, "m": params.m}
            )
        return self

    def refined(self) -> Self:
        """Doubled orders and halved panel widths, for refinement estimates."""
        return self.model_copy(
            update={
                "panels_per_decade": 2 * self.panels_per_decade,
                "jacobi_order": 2 * self.jacobi_order,
                "filon_order": 2 * self.filon_order,
                "legendre_order": 2 * self.legendre_order,
                "panel_width": self.panel_width / 2,
                "table_spacing": self.table_spacing / 2,
                "check_refinement": False,
            }
        )


def make_quadrature_spec(params: FlowParams, **overrides) -> QuadratureSpec:
    """Defaults: eta_max = xi_max = 40/m (|W| < 1e-17 beyond), delta0 = 1/(2m)."""
    values = {
        "eta_max": 40.0 / params.m,
        "xi_max": 40.0 / params.m,
        "delta0": 1.0 / (2 * params.m),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return QuadratureSpec(**values).validate_for(params)


# -------------------------------------------------
# Sobolev quantities
# -------------------------------------------------

def _trapezoid(values: np.ndarray, dx: float) -> float:
    return float(dx * (np.sum(values) - 0.5 * (values[0] + values[-1])))


def check_edge_decay(data: InitialDataProfile, grid: GridSpec, floor: float = 1e-12) -> None:
    edges = np.array([grid.y_min, grid.y_max])
    for name, profile in (("omega0", data.omega0), ("rho0", data.rho0)):
        worst = float(np.max(np.abs(profile(edges))))
        if worst >= floor:
            raise DomainError(
                f"{name} does not decay below {floor:g} at the grid edge",
                {"edge_value": worst, "y_min": grid.y_min, "y_max": grid.y_max},
            )


def sobolev_q(data: InitialDataProfile, j: int, params: FlowParams, grid: GridSpec) -> float:
    """
    Q_{j,m} = ||rho0||_{H^{2+j}} + ||omega0||_{H^{2+j}} by the trapezoid rule,
    derivatives taken analytically from the profiles.
    """
    if j not in (0, 1, 2):
        raise DomainError("sobolev_q needs j in {0, 1, 2}", {"j": j})
    check_edge_decay(data, grid)

    y = grid.nodes()
    total = 0.0
    for profile in (data.rho0, data.omega0):
        if profile.is_zero:
            continue
        derivs = profile.derivatives(y, order=2 + j)
        total += math.sqrt(sum(_trapezoid(d * d, grid.spacing) for d in derivs))
    logger.debug("Q_{%d,%d} = %.6g", j, params.m, total)
    return total
