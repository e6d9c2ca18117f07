"""
Method-of-lines reference solver for one x-mode:

    (d_t + imy) omega = -im beta^2 rho
    (d_t + imy) rho   =  im psi,      psi'' - m^2 psi = omega

Transport is pointwise in y, the elliptic constraint is a tridiagonal
second-order finite-difference solve with exact-decay Robin closure, and time
stepping is classical RK4.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.linalg import LinAlgError, solve_banded

from stratcouette.backend.core_types import ComplexField, FlowParams, GridSpec, InitialDataProfile
from stratcouette.backend.errors import DomainError, ResolutionError

logger = logging.getLogger(__name__)

# m * t_end * spacing above this no longer resolves the phase mixing
PHASE_MIXING_LIMIT = 0.3
# m * |y|max * dt above this under-resolves the imy rotation
ROTATION_LIMIT = 0.5


class EvolState(BaseModel):
    """Vorticity and density of one mode at one time."""

    model_config = ConfigDict(frozen=True)

    omega: ComplexField
    rho: ComplexField
    time: float = 0.0

    @model_validator(mode="after")
    def _check_state(self):
        if self.omega.grid != self.rho.grid:
            raise DomainError("omega and rho must share one grid")
        if self.time < 0:
            raise DomainError("state time must be nonnegative", {"time": self.time})
        return self

    @property
    def grid(self) -> GridSpec:
        return self.omega.grid

    @classmethod
    def from_arrays(cls, grid: GridSpec, omega: np.ndarray, rho: np.ndarray, time: float) -> "EvolState":
        return cls(
            omega=ComplexField(grid=grid, values=omega, time=time),
            rho=ComplexField(grid=grid, values=rho, time=time),
            time=time,
        )

    @classmethod
    def initial(cls, data: InitialDataProfile, grid: GridSpec) -> "EvolState":
        y = grid.nodes()
        return cls.from_arrays(grid, data.omega0(y), data.rho0(y), 0.0)


# -------------------------------------------------
# Elliptic solve
# -------------------------------------------------

def _banded_operator(n: int, h: float, m: int) -> np.ndarray:
    """psi'' - m^2 psi with Robin ghost rows psi' = +m psi (left), -m psi (right)."""
    inv_h2 = 1.0 / (h * h)
    ab = np.empty((3, n))
    ab[0, :] = inv_h2
    ab[2, :] = inv_h2
    ab[1, :] = -2.0 * inv_h2 - m * m
    ab[0, 1] = 2.0 * inv_h2
    ab[2, n - 2] = 2.0 * inv_h2
    ab[1, 0] = -(2.0 + 2.0 * h * m) * inv_h2 - m * m
    ab[1, n - 1] = ab[1, 0]
    return ab


def _solve(omega: np.ndarray, grid: GridSpec, m: int) -> np.ndarray:
    ab = _banded_operator(grid.n_points, grid.spacing, m)
    try:
        return solve_banded((1, 1), ab, omega.astype(complex))
    except LinAlgError as e:
        raise DomainError("singular elliptic matrix", {"m": m}) from e


def _check_edges(values: np.ndarray, tol: float, name: str) -> None:
    peak = float(np.max(np.abs(values)))
    edge = float(max(abs(values[0]), abs(values[-1])))
    if peak > 0 and edge > tol * peak:
        raise DomainError(f"{name} does not decay at the grid edge", {"edge": edge, "peak": peak, "tol": tol})


def elliptic_solve(omega: ComplexField, m: int, edge_tol: float = 1e-10) -> ComplexField:
    """
    Solve psi'' - m^2 psi = omega, psi -> 0 at infinity, by a tridiagonal solve.
    """
    if m < 1:
        raise DomainError("wavenumber m must be >= 1", {"m": m})
    _check_edges(omega.values, edge_tol, "omega")
    psi = _solve(np.asarray(omega.values), omega.grid, m)
    return ComplexField(grid=omega.grid, values=psi, time=omega.time)


# -------------------------------------------------
# Right-hand side and time stepping
# -------------------------------------------------

def _rhs_arrays(omega: np.ndarray, rho: np.ndarray, y: np.ndarray, grid: GridSpec,
                params: FlowParams) -> tuple[np.ndarray, np.ndarray]:
    im = 1j * params.m
    psi = _solve(omega, grid, params.m)
    d_omega = -im * y * omega - im * params.beta2 * rho
    d_rho = -im * y * rho + im * psi
    return d_omega, d_rho


def rhs(state: EvolState, params: FlowParams) -> tuple[np.ndarray, np.ndarray]:
    """(d_omega/dt, d_rho/dt) of the semi-discrete system."""
    y = state.grid.nodes()
    return _rhs_arrays(np.asarray(state.omega.values), np.asarray(state.rho.values), y, state.grid, params)


def max_t_end(grid: GridSpec, m: int) -> float:
    return PHASE_MIXING_LIMIT / (m * grid.spacing)


def check_resolution(grid: GridSpec, params: FlowParams, t_end: float, dt: float) -> None:
    limit = max_t_end(grid, params.m)
    if t_end > limit * (1 + 1e-12):
        raise ResolutionError(
            f"grid spacing {grid.spacing:.4g} cannot resolve phase mixing up to t={t_end:g}; "
            f"largest usable t_end is {limit:.4g}",
            limit,
            {"t_end": t_end, "m": params.m},
        )
    if not dt > 0:
        raise DomainError("time step must be positive", {"dt": dt})
    if dt > ROTATION_LIMIT / (params.m * grid.y_abs_max) * (1 + 1e-12):
        raise ResolutionError(
            f"dt={dt:g} exceeds 0.5/(m |y|max) = {ROTATION_LIMIT / (params.m * grid.y_abs_max):.4g}",
            limit,
            {"dt": dt},
        )


def _rk4_step(omega, rho, y, grid, params, dt):
    k1 = _rhs_arrays(omega, rho, y, grid, params)
    k2 = _rhs_arrays(omega + 0.5 * dt * k1[0], rho + 0.5 * dt * k1[1], y, grid, params)
    k3 = _rhs_arrays(omega + 0.5 * dt * k2[0], rho + 0.5 * dt * k2[1], y, grid, params)
    k4 = _rhs_arrays(omega + dt * k3[0], rho + dt * k3[1], y, grid, params)
    omega = omega + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    rho = rho + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return omega, rho


def integrate(state0: EvolState, params: FlowParams, t_end: float, dt: float,
              output_times: list[float] | None = None) -> list[EvolState]:
    """
    RK4 from state0.time to t_end. Returns the states at output_times (default
    [t_end]); steps are shortened uniformly so every output time is hit exactly.
    """
    grid = state0.grid
    check_resolution(grid, params, t_end, dt)
    times = sorted(output_times) if output_times else [t_end]
    if times[0] < state0.time or times[-1] > t_end * (1 + 1e-12):
        raise DomainError("output times must lie in [t0, t_end]", {"times": times, "t_end": t_end})

    y = grid.nodes()
    omega = np.asarray(state0.omega.values, dtype=complex).copy()
    rho = np.asarray(state0.rho.values, dtype=complex).copy()
    t = state0.time
    out = []
    logger.info("reference solve: m=%d beta=%g to t=%g with dt=%g", params.m, params.beta, t_end, dt)
    for target in times:
        span = target - t
        if span > 0:
            n_steps = math.ceil(span / dt - 1e-12)
            step = span / n_steps
            for _ in range(n_steps):
                omega, rho = _rk4_step(omega, rho, y, grid, params, step)
        t = target
        out.append(EvolState.from_arrays(grid, omega, rho, t))
        logger.debug("reference solve reached t=%g", t)
    return out


def solve_fields(state: EvolState, params: FlowParams) -> dict[str, np.ndarray]:
    """psi, rho, omega, ux, uy of a state (same columns as the explicit snapshot)."""
    grid = state.grid
    omega = np.asarray(state.omega.values)
    psi = _solve(omega, grid, params.m)
    dpsi = np.gradient(psi, grid.spacing, edge_order=2)
    return {
        "psi": psi,
        "rho": np.asarray(state.rho.values),
        "omega": omega,
        "ux": -dpsi,
        "uy": 1j * params.m * psi,
    }


# -------------------------------------------------
# Energy
# -------------------------------------------------

def _inner(a: np.ndarray, b: np.ndarray, h: float) -> complex:
    """Trapezoid inner product int conj(a) b dy."""
    prod = np.conj(a) * b
    return complex(h * (np.sum(prod) - 0.5 * (prod[0] + prod[-1])))


def energy_functional(state: EvolState, params: FlowParams) -> float:
    """beta^2 ||rho||^2 + ||psi'||^2 + m^2 ||psi||^2, the last two as -Re <psi, omega>."""
    h = state.grid.spacing
    omega = np.asarray(state.omega.values)
    rho = np.asarray(state.rho.values)
    psi = _solve(omega, state.grid, params.m)
    return float(params.beta2 * _inner(rho, rho, h).real - _inner(psi, omega, h).real)


def energy_budget(state: EvolState, params: FlowParams) -> dict[str, float]:
    """
    Time derivative of the energy functional from rhs, split into the buoyancy
    exchange (zero up to round-off) and the shear production 2m Im int conj(psi) psi'.
    """
    grid = state.grid
    h = grid.spacing
    y = grid.nodes()
    omega = np.asarray(state.omega.values)
    rho = np.asarray(state.rho.values)
    psi = _solve(omega, grid, params.m)
    im = 1j * params.m
    beta2 = params.beta2

    exchange = (
        2 * beta2 * _inner(rho, im * psi, h).real
        - 2 * _inner(psi, -im * beta2 * rho, h).real
    )
    transport = 2 * beta2 * _inner(rho, -im * y * rho, h).real - 2 * _inner(psi, -im * y * omega, h).real
    d_omega, d_rho = _rhs_arrays(omega, rho, y, grid, params)
    rate = 2 * beta2 * _inner(rho, d_rho, h).real - 2 * _inner(psi, d_omega, h).real

    dpsi = np.gradient(psi, h, edge_order=2)
    production = 2 * params.m * _inner(psi, dpsi, h).imag
    return {
        "energy": energy_functional(state, params),
        "rate": float(rate),
        "exchange": float(exchange),
        "transport": float(transport),
        "production": float(production),
    }
