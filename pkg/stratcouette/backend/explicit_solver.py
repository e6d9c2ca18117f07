"""
Closed-form solution of the linearized Boussinesq system around stratified Couette flow.

With c = cos(gamma pi) / (2 m pi) and the moving-frame profiles
    Psi   = c [ int e^{+im eta t} W J+(y-eta)   - int e^{-im eta t} W J-(y+eta) ]
    P     = c [ int e^{+im eta t} W/eta J+      + int e^{-im eta t} W/eta J- ]
    D     = c [ int e^{+im eta t} W' J+         + int e^{-im eta t} W' J- ]
the physical fields are psi = e^{-imyt} Psi, rho = e^{-imyt} P, d_y psi = e^{-imyt} D and
omega = e^{-imyt} (-m^2 t^2 Psi - 2imt Psi' + Psi'' - m^2 Psi). Psi' and Psi'' use the
tabulated derivatives J', J'' (the y-derivatives of G), never numerical differentiation.
"""

import logging
import math
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from stratcouette.backend.core_types import ComplexField, GridSpec, QuadratureSpec
from stratcouette.backend.errors import DomainError, NonConvergenceError, ToleranceNotMetError
from stratcouette.backend.kernel import KernelContext
from stratcouette.backend.oscquad import (
    InnerTable,
    OuterWeight,
    check_amplification,
    outer_rule,
    plan_panels,
)

logger = logging.getLogger(__name__)

Y_CHUNK = 64
ACHIEVED_SAMPLES = 8


class SolutionSnapshot(BaseModel):
    """All fields of one mode at one time on one grid."""

    model_config = ConfigDict(frozen=True)

    time: float
    psi: ComplexField
    rho: ComplexField
    omega: ComplexField
    ux: ComplexField
    uy: ComplexField
    quadrature_meta: dict = {}

    @model_validator(mode="after")
    def _check_shared(self):
        fields = (self.psi, self.rho, self.omega, self.ux, self.uy)
        if any(f.grid != self.psi.grid for f in fields):
            raise DomainError("snapshot fields must share one grid")
        if any(f.time != self.time for f in fields):
            raise DomainError("snapshot fields must share one time", {"time": self.time})
        return self

    @property
    def grid(self) -> GridSpec:
        return self.psi.grid

    def as_columns(self) -> dict[str, np.ndarray]:
        return {
            "psi": self.psi.values,
            "rho": self.rho.values,
            "omega": self.omega.values,
            "ux": self.ux.values,
            "uy": self.uy.values,
        }


class MovingFrame(BaseModel):
    """Moving-frame profiles Psi, Psi', Psi'', P, D at one time."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t: float
    y: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    d2psi: np.ndarray
    rho: np.ndarray
    dy_psi: np.ndarray

    def vorticity(self, m: int) -> np.ndarray:
        t = self.t
        return -(m * t) ** 2 * self.psi - 2j * m * t * self.dpsi + self.d2psi - m * m * self.psi


class ExplicitSolver:
    """
    Evaluates the explicit formulas for one (context, quadrature) pair.
    The inner-integral table is built lazily and grown when a request leaves
    its y-range; outer rules are rebuilt per time (they are cheap).
    """

    def __init__(self, ctx: KernelContext, spec: QuadratureSpec, y_range: tuple[float, float] | None = None):
        spec.validate_for(ctx.params)
        check_amplification(ctx.params)
        self.ctx = ctx
        self.spec = spec
        self.params = ctx.params
        self.coef = ctx.params.cos_gamma_pi / (2.0 * ctx.params.m * math.pi)
        if y_range is None:
            lo, hi = ctx.data.support()
            y_range = (min(lo, -1.0), max(hi, 1.0))
        self._y_range = (float(y_range[0]), float(y_range[1]))
        self._table: InnerTable | None = None

    # -------------------------------------------------
    # Tables and rules
    # -------------------------------------------------

    def table_for(self, y: np.ndarray) -> InnerTable:
        y_lo, y_hi = float(np.min(y)), float(np.max(y))
        if self._table is None or not self._table.covers(y_lo, y_hi):
            lo = min(y_lo, self._y_range[0])
            hi = max(y_hi, self._y_range[1])
            self._y_range = (lo, hi)
            logger.debug("building inner tables on y in [%.3f, %.3f]", lo, hi)
            self._table = InnerTable(self.ctx, self.spec, lo, hi)
        return self._table

    def _weights(self, t: float, split_delta: float | None):
        plan = plan_panels(self.params, t, self.spec, split_delta)
        rules = {
            (w, s): outer_rule(self.params, plan, self.spec, w, s)
            for w in OuterWeight
            for s in (1, -1)
        }
        nodes = rules[(OuterWeight.W, 1)].nodes
        return nodes, {key: rule.weights for key, rule in rules.items()}

    # -------------------------------------------------
    # Moving-frame evaluation
    # -------------------------------------------------

    def moving_frame(self, t: float, y, split_delta: float | None = None) -> MovingFrame:
        if t < 0:
            raise DomainError("explicit formulas are evaluated for t >= 0 only", {"t": t})
        y = np.atleast_1d(np.asarray(y, dtype=float))
        shape = y.shape
        flat = y.ravel()
        out = {name: np.zeros(flat.size, dtype=complex) for name in ("psi", "dpsi", "d2psi", "rho", "dy_psi")}

        if not self.ctx.is_zero:
            table = self.table_for(flat)
            nodes, wts = self._weights(t, split_delta)
            w_p, w_m = wts[(OuterWeight.W, 1)], wts[(OuterWeight.W, -1)]
            r_p, r_m = wts[(OuterWeight.W_OVER_ETA, 1)], wts[(OuterWeight.W_OVER_ETA, -1)]
            d_p, d_m = wts[(OuterWeight.W_PRIME, 1)], wts[(OuterWeight.W_PRIME, -1)]
            for start in range(0, flat.size, Y_CHUNK):
                sl = slice(start, start + Y_CHUNK)
                yb = flat[sl][:, None]
                jp = table.evaluate(1, yb - nodes[None, :])
                jm = table.evaluate(-1, yb + nodes[None, :])
                out["psi"][sl] = jp[..., 0] @ w_p - jm[..., 0] @ w_m
                out["dpsi"][sl] = jp[..., 1] @ w_p - jm[..., 1] @ w_m
                out["d2psi"][sl] = jp[..., 2] @ w_p - jm[..., 2] @ w_m
                out["rho"][sl] = jp[..., 0] @ r_p + jm[..., 0] @ r_m
                out["dy_psi"][sl] = jp[..., 0] @ d_p + jm[..., 0] @ d_m

        bad = np.zeros(flat.size, dtype=bool)
        for name in out:
            out[name] = self.coef * out[name]
            bad |= ~np.isfinite(out[name])
        if np.any(bad):
            raise NonConvergenceError(
                "non-finite quadrature values",
                {"t": t, "y": flat[bad][:10].tolist(), "count": int(bad.sum())},
            )
        return MovingFrame(t=t, y=y, **{k: v.reshape(shape) for k, v in out.items()})

    def _phase(self, t: float, y: np.ndarray) -> np.ndarray:
        return np.exp(-1j * self.params.m * y * t)

    @staticmethod
    def _finish(values: np.ndarray, y):
        return complex(values.ravel()[0]) if np.ndim(y) == 0 else values.reshape(np.shape(y))

    def stream_function(self, t: float, y):
        frame = self.moving_frame(t, y)
        return self._finish(self._phase(t, frame.y) * frame.psi, y)

    def density(self, t: float, y):
        frame = self.moving_frame(t, y)
        return self._finish(self._phase(t, frame.y) * frame.rho, y)

    def dy_stream_function(self, t: float, y):
        frame = self.moving_frame(t, y)
        return self._finish(self._phase(t, frame.y) * frame.dy_psi, y)

    def vorticity(self, t: float, y):
        frame = self.moving_frame(t, y)
        return self._finish(self._phase(t, frame.y) * frame.vorticity(self.params.m), y)

    # -------------------------------------------------
    # Snapshots
    # -------------------------------------------------

    def achieved_tolerance(self, t: float, y, frame: MovingFrame | None = None) -> float:
        """
        Relative max-norm gap of Psi, P and D against the refined quadrature. Without
        check_refinement only ACHIEVED_SAMPLES evenly spaced nodes of y are compared.
        """
        if self.ctx.is_zero:
            return 0.0
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if frame is None:
            frame = self.moving_frame(t, y)
        pick = slice(None)
        if not self.spec.check_refinement and y.size > ACHIEVED_SAMPLES:
            pick = np.unique(np.linspace(0, y.size - 1, ACHIEVED_SAMPLES).round().astype(int))
        fine = get_solver(self.ctx, self.spec.refined()).moving_frame(t, y[pick])
        return max(
            float(np.max(np.abs(getattr(fine, name) - getattr(frame, name)[pick])))
            / max(float(np.max(np.abs(getattr(fine, name)))), 1e-300)
            for name in ("psi", "rho", "dy_psi")
        )

    def snapshot(self, t: float, grid: GridSpec) -> SolutionSnapshot:
        y = grid.nodes()
        frame = self.moving_frame(t, y)
        phase = self._phase(t, y)
        m = self.params.m
        psi = phase * frame.psi
        meta = {
            "eta_max": self.spec.eta_max,
            "xi_max": self.spec.xi_max,
            "tolerance": self.spec.tolerance,
            "truncation_bound": math.exp(-self.params.m * min(self.spec.eta_max, self.spec.xi_max)),
            "split_delta": plan_panels(self.params, t, self.spec).split_delta,
        }
        meta["achieved_tolerance"] = self.achieved_tolerance(t, y, frame)
        if self.spec.check_refinement and meta["achieved_tolerance"] > self.spec.tolerance:
            raise ToleranceNotMetError("snapshot refinement estimate too large", meta["achieved_tolerance"],
                                       self.spec.tolerance, {"t": t})

        def field(values):
            return ComplexField(grid=grid, values=values, time=t)

        logger.info("explicit snapshot t=%g on %d points", t, grid.n_points)
        return SolutionSnapshot(
            time=t,
            psi=field(psi),
            rho=field(phase * frame.rho),
            omega=field(phase * frame.vorticity(m)),
            ux=field(-phase * frame.dy_psi),
            uy=field(1j * m * psi),
            quadrature_meta=meta,
        )

    # -------------------------------------------------
    # Residual checks
    # -------------------------------------------------

    def _three_levels(self, t: float, y, h_t: float):
        if not (h_t > 0 and t >= h_t):
            raise DomainError("residuals need t >= h_t > 0", {"t": t, "h_t": h_t})
        # one panel geometry for all three levels
        split = plan_panels(self.params, t, self.spec).split_delta
        return [self.moving_frame(s, y, split) for s in (t - h_t, t, t + h_t)]

    def pde_residual(self, t: float, y, h_t: float):
        """
        r1 = (D_t + imy) omega + im beta^2 rho,  r2 = (D_t + imy) rho - im psi.
        """
        before, now, after = self._three_levels(t, y, h_t)
        m, beta2 = self.params.m, self.params.beta2
        yy = now.y

        def omega(frame):
            return self._phase(frame.t, yy) * frame.vorticity(m)

        def rho(frame):
            return self._phase(frame.t, yy) * frame.rho

        r1 = (omega(after) - omega(before)) / (2 * h_t) + 1j * m * yy * omega(now) + 1j * m * beta2 * rho(now)
        r2 = (rho(after) - rho(before)) / (2 * h_t) + 1j * m * yy * rho(now) - 1j * m * self._phase(t, yy) * now.psi
        return self._finish(r1, y), self._finish(r2, y)

    def moving_frame_residual(self, t: float, y, h_t: float):
        """r1 = d_t Om + im beta^2 P,  r2 = d_t P - im Psi."""
        before, now, after = self._three_levels(t, y, h_t)
        m, beta2 = self.params.m, self.params.beta2
        r1 = (after.vorticity(m) - before.vorticity(m)) / (2 * h_t) + 1j * m * beta2 * now.rho
        r2 = (after.rho - before.rho) / (2 * h_t) - 1j * m * now.psi
        return self._finish(r1, y), self._finish(r2, y)


@lru_cache(maxsize=8)
def get_solver(ctx: KernelContext, spec: QuadratureSpec) -> ExplicitSolver:
    return ExplicitSolver(ctx, spec)


def stream_function(ctx: KernelContext, t: float, y, spec: QuadratureSpec):
    return get_solver(ctx, spec).stream_function(t, y)


def density(ctx: KernelContext, t: float, y, spec: QuadratureSpec):
    return get_solver(ctx, spec).density(t, y)


def dy_stream_function(ctx: KernelContext, t: float, y, spec: QuadratureSpec):
    return get_solver(ctx, spec).dy_stream_function(t, y)


def vorticity(ctx: KernelContext, t: float, y, spec: QuadratureSpec):
    return get_solver(ctx, spec).vorticity(t, y)


def snapshot(ctx: KernelContext, t: float, grid: GridSpec, spec: QuadratureSpec) -> SolutionSnapshot:
    return get_solver(ctx, spec).snapshot(t, grid)


def pde_residual(ctx: KernelContext, t: float, y, spec: QuadratureSpec, h_t: float):
    return get_solver(ctx, spec).pde_residual(t, y, h_t)


def moving_frame_residual(ctx: KernelContext, t: float, y, spec: QuadratureSpec, h_t: float):
    return get_solver(ctx, spec).moving_frame_residual(t, y, h_t)


def conjugate_mode(snap: SolutionSnapshot) -> SolutionSnapshot:
    """Fields of the mode -m for real initial data: every field conjugated."""
    meta = dict(snap.quadrature_meta)
    meta["conjugated"] = not meta.get("conjugated", False)
    return SolutionSnapshot(
        time=snap.time,
        psi=snap.psi.conjugate(),
        rho=snap.rho.conjugate(),
        omega=snap.omega.conjugate(),
        ux=snap.ux.conjugate(),
        uy=snap.uy.conjugate(),
        quadrature_meta=meta,
    )
