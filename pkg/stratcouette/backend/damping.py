"""
Decay of the velocity and density norms of one mode.

- mode_l2 reduces a field to its L^2_y norm
- decay_series evaluates explicit snapshots over a list of times
- fit_decay fits log(norm) against a power law, optionally with a (1 + log t) factor
- expected_exponent / bound_constants / prefactor_ratio report against the
  rates 1/2 - mu (u^x, rho) and 3/2 - mu (u^y, psi)
"""

import logging
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from typing_extensions import Self

from stratcouette.backend.core_types import ComplexField, FlowParams, GridSpec, QuadratureSpec
from stratcouette.backend.errors import DomainError
from stratcouette.backend.explicit_solver import get_solver
from stratcouette.backend.kernel import KernelContext

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 6
MIN_FIT_DECADES = 1.5


class Quantity(str, Enum):
    UX = "ux"
    UY = "uy"
    RHO = "rho"
    PSI = "psi"


class DecaySeries(BaseModel):
    model_config = ConfigDict(frozen=True)

    quantity: Quantity
    times: tuple[float, ...]
    norms: tuple[float, ...]

    @field_validator("times", "norms", mode="before")
    @classmethod
    def _as_tuple(cls, v):
        return tuple(float(x) for x in np.asarray(v, dtype=float).ravel())

    @model_validator(mode="after")
    def _check_series(self):
        if len(self.times) != len(self.norms):
            raise DomainError("times and norms differ in length",
                              {"times": len(self.times), "norms": len(self.norms)})
        if any(t < 1 for t in self.times):
            raise DomainError("decay series start at t >= 1", {"times": self.times})
        if any(b <= a for a, b in zip(self.times[:-1], self.times[1:])):
            raise DomainError("times must be strictly ascending", {"times": self.times})
        if any(n < 0 or not math.isfinite(n) for n in self.norms):
            raise DomainError("norms must be finite and nonnegative", {"norms": self.norms})
        return self

    def scaled(self, factor: float) -> Self:
        return self.model_copy(update={"norms": tuple(factor * n for n in self.norms)})


class DecayFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    exponent: float
    amplitude: float
    log_factor: bool
    r_squared: float
    residual: float = 0.0
    alternative_residual: float | None = None

    @model_validator(mode="after")
    def _check_fit(self):
        if not 0.0 <= self.r_squared <= 1.0:
            raise DomainError("r_squared must lie in [0, 1]", {"r_squared": self.r_squared})
        return self


# -------------------------------------------------
# Norms
# -------------------------------------------------

def mode_l2(field: ComplexField, edge_tol: float | None = 1e-8) -> float:
    """
    Trapezoid L^2_y norm of one mode. With edge_tol set, the field at both grid
    ends must be below edge_tol times its maximum.
    """
    values = np.abs(np.asarray(field.values))
    peak = float(np.max(values)) if values.size else 0.0
    if peak == 0.0:
        return 0.0
    if edge_tol is not None:
        edge = float(max(values[0], values[-1]))
        if edge > edge_tol * peak:
            raise DomainError("field does not decay at the grid edge; enlarge the domain",
                              {"edge": edge, "peak": peak, "edge_tol": edge_tol})
    sq = values * values
    h = field.grid.spacing
    return math.sqrt(h * (float(np.sum(sq)) - 0.5 * float(sq[0] + sq[-1])))


def decay_series(ctx: KernelContext, quantity, times, grid: GridSpec, spec: QuadratureSpec,
                 edge_tol: float | None = 1e-8) -> DecaySeries:
    """u^x uses |d_y psi|, u^y uses m |psi|; rho and psi their own moduli."""
    quantity = Quantity(quantity)
    times = [float(t) for t in times]
    if not times or times[0] < 1:
        raise DomainError("decay series need times >= 1", {"times": times})
    if ctx.is_zero:
        return DecaySeries(quantity=quantity, times=times, norms=[0.0] * len(times))

    solver = get_solver(ctx, spec)
    norms = []
    for t in times:
        snap = solver.snapshot(t, grid)
        norms.append(mode_l2(getattr(snap, quantity.value), edge_tol))
        logger.info("decay series %s: t=%g norm=%.6e", quantity.value, t, norms[-1])
    return DecaySeries(quantity=quantity, times=times, norms=norms)


# -------------------------------------------------
# Fits
# -------------------------------------------------

def _least_squares(log_t: np.ndarray, target: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(log_t, target, 1)
    ssr = float(np.sum((target - (slope * log_t + intercept)) ** 2))
    return float(slope), float(intercept), ssr


def fit_decay(series: DecaySeries, try_log: bool = True) -> DecayFit:
    """
    Fit log(norm) = log(a) - alpha log(t) (+ log(1 + log t)) and keep the model
    with the smaller sum of squared residuals.
    """
    t = np.asarray(series.times)
    norms = np.asarray(series.norms)
    if t.size < MIN_FIT_POINTS or math.log10(t[-1] / t[0]) < MIN_FIT_DECADES:
        raise DomainError(
            f"decay fits need at least {MIN_FIT_POINTS} points over {MIN_FIT_DECADES} decades",
            {"points": int(t.size), "t_min": float(t[0]), "t_max": float(t[-1])},
        )
    if np.any(norms <= 0):
        raise DomainError("decay fits need positive norms", {"quantity": series.quantity.value})

    log_t = np.log(t)
    log_n = np.log(norms)
    sst = float(np.sum((log_n - log_n.mean()) ** 2))

    slope, intercept, ssr = _least_squares(log_t, log_n)
    best = (slope, intercept, ssr, False)
    other = None
    if try_log:
        corrected = log_n - np.log1p(log_t)
        l_slope, l_intercept, l_ssr = _least_squares(log_t, corrected)
        if l_ssr < ssr:
            best, other = (l_slope, l_intercept, l_ssr, True), ssr
        else:
            other = l_ssr

    slope, intercept, ssr, log_factor = best
    r2 = 1.0 if sst == 0 else min(1.0, max(0.0, 1.0 - ssr / sst))
    fit = DecayFit(
        exponent=-slope,
        amplitude=math.exp(intercept),
        log_factor=log_factor,
        r_squared=r2,
        residual=ssr,
        alternative_residual=other,
    )
    logger.debug("fit %s: exponent=%.4f log=%s r2=%.6f", series.quantity.value, fit.exponent, log_factor, r2)
    return fit


def expected_exponent(params: FlowParams, quantity) -> float:
    quantity = Quantity(quantity)
    base = 0.5 if quantity in (Quantity.UX, Quantity.RHO) else 1.5
    return base - params.mu


# (power of m, Sobolev index j) in norm <= C m^-k t^-rate Q_{j,m}
_BOUND_SHAPE = {
    Quantity.UX: (2, 1),
    Quantity.RHO: (1, 1),
    Quantity.UY: (2, 2),
    Quantity.PSI: (3, 2),
}


def bound_constants(series: DecaySeries, params: FlowParams, q_values: dict[int, float]) -> list[float]:
    """Implicit constants norm(t) t^rate / (m^-k Q_j), divided by (1 + log t) in the log case."""
    k, j = _BOUND_SHAPE[series.quantity]
    if j not in q_values or q_values[j] <= 0:
        raise DomainError("bound_constants needs a positive Q value", {"j": j, "q_values": q_values})
    rate = expected_exponent(params, series.quantity)
    scale = params.m ** (-k) * q_values[j]
    out = []
    for t, n in zip(series.times, series.norms):
        c = n * t ** rate / scale
        if params.is_log_case:
            c /= 1.0 + math.log(t)
        out.append(c)
    return out


def prefactor_ratio(series_m1: DecaySeries, series_m2: DecaySeries) -> list[float]:
    if series_m1.quantity != series_m2.quantity:
        raise DomainError("prefactor ratios compare one quantity",
                          {"m1": series_m1.quantity.value, "m2": series_m2.quantity.value})
    if not np.allclose(series_m1.times, series_m2.times, rtol=1e-12, atol=0):
        raise DomainError("prefactor ratios need matching times")
    return [a / b if b > 0 else math.inf for a, b in zip(series_m1.norms, series_m2.norms)]
