"""
Limiting-absorption construction at the critical layer y = y0.

For eps > 0 and sign s = +-1, with Y = y - y0 + s i eps and W(x) = W_{0,gamma}(2 m x):
- Green's function of Delta_m + beta^2 / Y^2:
      G(y, z) = -(1/2m) W(y0 - z - s i eps) W(y - y0 + s i eps)   (y >= z)
      G(y, z) = -(1/2m) W(z - y0 + s i eps) W(y0 - y - s i eps)   (y <= z)
- generalized stream function  psi = Y omega0 / beta^2 - rho0 + int G H dz
- generalized density          rho = omega0 / beta^2 + (1/Y) int G H dz
- the t = 0 reconstruction psi(0, y) = (1/2 pi i) int (psi^- - psi^+) dy0, eps -> 0
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.integrate import cumulative_trapezoid
from typing_extensions import Self

from stratcouette.backend.core_types import ComplexField, FlowParams, GridSpec, QuadratureSpec
from stratcouette.backend.errors import DomainError, NonConvergenceError, StepTooLargeError
from stratcouette.backend.kernel import KernelContext, h_source
from stratcouette.backend.oscquad import gauss_rule, inner_integral
from stratcouette.backend.specfun import continuation_jump, scaled_w

logger = logging.getLogger(__name__)

DEFAULT_EPS_SEQUENCE = (0.2, 0.1, 0.05, 0.025)

# breakpoints around the critical layer, in units of eps
_LAYER_OFFSETS = (-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0)

LATTICE_BLOCK = 128


class SpectralPoint(BaseModel):
    """Spectral parameter y0 approached from above (sign=+1) or below (sign=-1)."""

    model_config = ConfigDict(frozen=True)

    y0: float
    epsilon: float
    sign: int = 1

    @model_validator(mode="after")
    def _check_point(self):
        if not self.epsilon > 0:
            raise DomainError("Green's functions need epsilon > 0", {"epsilon": self.epsilon})
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1", {"sign": self.sign})
        return self

    def shift(self, y) -> np.ndarray:
        """Y = y - y0 + sign i eps."""
        return np.asarray(y, dtype=float) - self.y0 + 1j * self.sign * self.epsilon

    def flipped(self) -> Self:
        return self.model_copy(update={"sign": -self.sign})


def _w(params: FlowParams, x) -> np.ndarray:
    return scaled_w(params.gamma, params.m, x, order=0)[0]


def greens_function(params: FlowParams, pt: SpectralPoint, y, z):
    """Taylor-Goldstein Green's function, symmetric in (y, z)."""
    y_arr = np.asarray(y, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    upper = np.maximum(y_arr, z_arr)
    lower = np.minimum(y_arr, z_arr)
    s_eps = 1j * pt.sign * pt.epsilon
    value = -_w(params, pt.y0 - lower - s_eps) * _w(params, upper - pt.y0 + s_eps) / (2.0 * params.m)
    return complex(value) if np.ndim(value) == 0 else value


# -------------------------------------------------
# z-integrals by Gauss panels
# -------------------------------------------------

def _z_rule(ctx: KernelContext, y: float, pt: SpectralPoint, quad: QuadratureSpec):
    lo, hi = ctx.data.support()
    points = {lo, hi}
    points.update(pt.y0 + pt.epsilon * k for k in _LAYER_OFFSETS)
    points.add(y)
    cuts = sorted(p for p in points if lo <= p <= hi)
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        n_sub = max(1, math.ceil((b - a) / quad.panel_width))
        edges = np.linspace(a, b, n_sub + 1)
        for c, d in zip(edges[:-1], edges[1:]):
            x, w = gauss_rule(c, d, quad.legendre_order)
            nodes.append(x)
            weights.append(w)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def _convolution(ctx: KernelContext, pt: SpectralPoint, y: float, quad: QuadratureSpec) -> complex:
    """int G(y, z) H(z, y0) dz over the data support."""
    z, w = _z_rule(ctx, y, pt, quad)
    if z.size == 0:
        return 0j
    green = greens_function(ctx.params, pt, y, z)
    source = h_source(ctx, z, pt.y0, pt.epsilon, pt.sign)
    return complex(np.sum(w * green * source))


def _per_point(func, y):
    y_arr = np.asarray(y, dtype=float)
    values = np.array([func(float(v)) for v in y_arr.ravel()], dtype=complex).reshape(y_arr.shape)
    return complex(values) if values.ndim == 0 else values


def generalized_stream(ctx: KernelContext, pt: SpectralPoint, y, quad: QuadratureSpec):
    beta2 = ctx.beta2

    def one(yv: float) -> complex:
        if ctx.is_zero:
            return 0j
        explicit = pt.shift(yv) * ctx.data.omega0(yv) / beta2 - ctx.data.rho0(yv)
        return complex(explicit) + _convolution(ctx, pt, yv, quad)

    return _per_point(one, y)


def generalized_density(ctx: KernelContext, pt: SpectralPoint, y, quad: QuadratureSpec):
    beta2 = ctx.beta2

    def one(yv: float) -> complex:
        if ctx.is_zero:
            return 0j
        return complex(ctx.data.omega0(yv) / beta2 + _convolution(ctx, pt, yv, quad) / pt.shift(yv))

    return _per_point(one, y)


def tg_residual(ctx: KernelContext, pt: SpectralPoint, y: float, quad: QuadratureSpec, h: float) -> complex:
    """
    Delta_m psi + beta^2 psi / Y^2 - (omega0 / Y - beta^2 rho0 / Y^2), with
    Delta_m psi by central second differences of step h.
    """
    if not 0 < h <= pt.epsilon / 10 * (1 + 1e-12):
        raise StepTooLargeError("finite-difference step must satisfy 0 < h <= eps/10",
                                {"h": h, "epsilon": pt.epsilon})
    psi = generalized_stream(ctx, pt, np.array([y - h, y, y + h]), quad)
    m2, beta2 = ctx.m ** 2, ctx.beta2
    lap = (psi[0] - 2 * psi[1] + psi[2]) / (h * h) - m2 * psi[1]
    big_y = pt.shift(y)
    rhs = ctx.data.omega0(y) / big_y - beta2 * ctx.data.rho0(y) / big_y ** 2
    return complex(lap + beta2 * psi[1] / big_y ** 2 - rhs)


# -------------------------------------------------
# Jump assembly
# -------------------------------------------------

def jump_assembly(ctx: KernelContext, y: float, y0: float, epsilon: float,
                  quad: QuadratureSpec) -> dict[str, complex]:
    """
    Three views of int (G^- - G^+) H^- dz at (y, y0):
    - direct: both Green's functions evaluated as they are
    - assembled: differences of W across the negative axis taken from continuation_jump
    - limit: the eps -> 0 value -(i cos(gamma pi)/m) W(eta) int_0 W(xi) G(eta, xi, y) dxi
    """
    params = ctx.params
    eta = y - y0
    if eta == 0:
        raise DomainError("jump_assembly needs y != y0", {"y": y, "y0": y0})
    minus = SpectralPoint(y0=y0, epsilon=epsilon, sign=-1)
    plus = minus.flipped()
    coef = -1.0 / (2.0 * params.m)
    ie = 1j * epsilon

    z, w = _z_rule(ctx, y, minus, quad)
    source = h_source(ctx, z, y0, epsilon, -1)
    direct = complex(np.sum(w * (greens_function(params, minus, y, z) - greens_function(params, plus, y, z)) * source))

    def jump_or_difference(x: np.ndarray) -> np.ndarray:
        """W(-x + i eps) - W(-x - i eps)."""
        out = np.empty(x.shape, dtype=complex)
        pos = x > 0
        if np.any(pos):
            out[pos] = continuation_jump(params.gamma, x[pos], epsilon, params.m)
        if np.any(~pos):
            out[~pos] = _w(params, -x[~pos] + ie) - _w(params, -x[~pos] - ie)
        return out

    xi = z - y0
    below = z <= y
    # y >= z: A = W(-xi - s i eps), B = W(eta + s i eps)
    # y <= z: A = W(xi + s i eps),  B = W(-eta - s i eps)
    a_plus_val = np.where(below, _w(params, -xi - ie), _w(params, xi + ie))
    b_minus_val = np.where(below, _w(params, eta - ie), _w(params, -eta + ie))
    delta_a = np.where(below, jump_or_difference(xi), -jump_or_difference(-xi))
    eta_arr = np.array([eta])
    delta_b = np.where(below, -jump_or_difference(-eta_arr)[0], jump_or_difference(eta_arr)[0])
    assembled = coef * complex(np.sum(w * (delta_a * b_minus_val + a_plus_val * delta_b) * source))

    cos_gp = params.cos_gamma_pi
    w_eta = complex(_w(params, abs(eta)))
    if eta > 0:
        limit = -1j * cos_gp / params.m * w_eta * inner_integral(ctx, eta, y, 1, quad)
    else:
        limit = 1j * cos_gp / params.m * w_eta * inner_integral(ctx, -eta, y, -1, quad)
    return {"direct": direct, "assembled": assembled, "limit": complex(limit)}


# -------------------------------------------------
# Lattice evaluation and t = 0 reconstruction
# -------------------------------------------------

class LapLattice(BaseModel):
    """Shared uniform lattice for y, z and y0."""

    model_config = ConfigDict(frozen=True)

    start: float
    spacing: float
    n_points: int

    def nodes(self) -> np.ndarray:
        return self.start + self.spacing * np.arange(self.n_points)

    @classmethod
    def around(cls, grid: GridSpec, extension: float = 0.0) -> "LapLattice":
        n_ext = int(round(extension / grid.spacing))
        return cls(start=grid.y_min - n_ext * grid.spacing, spacing=grid.spacing,
                   n_points=grid.n_points + 2 * n_ext)


def lattice_stream(ctx: KernelContext, lattice: LapLattice, epsilon: float, sign: int) -> np.ndarray:
    """
    psi^sign(y_k, y0_j) for every lattice pair, shape (n_y0, n_y). The z-integral is a
    cumulative trapezoid split at z = y; W is tabulated once on the lattice offsets.
    """
    params = ctx.params
    n, h = lattice.n_points, lattice.spacing
    nodes = lattice.nodes()
    offsets = h * np.arange(-(n - 1), n)
    s_eps = 1j * sign * epsilon
    # W(d h + s i eps) and W(d h - s i eps)
    w_up = _w(params, offsets + s_eps)
    w_dn = _w(params, offsets - s_eps)

    omega0 = ctx.data.omega0(nodes)
    rho0 = ctx.data.rho0(nodes)
    out = np.empty((n, n), dtype=complex)
    k = np.arange(n)
    for start in range(0, n, LATTICE_BLOCK):
        j = np.arange(start, min(start + LATTICE_BLOCK, n))
        y0 = nodes[j][:, None]
        # f_right(y) = W(y - y0 + s i eps), f_left(z) = W(y0 - z - s i eps)
        diff = k[None, :] - j[:, None]
        f_right = w_up[diff + n - 1]
        f_left = w_dn[-diff + n - 1]
        source = h_source(ctx, nodes[None, :], y0, epsilon, sign)
        left = cumulative_trapezoid(f_left * source, dx=h, axis=1, initial=0)
        right_part = cumulative_trapezoid(f_right * source, dx=h, axis=1, initial=0)
        right = right_part[:, -1:] - right_part
        conv = -(f_right * left + f_left * right) / (2.0 * params.m)
        big_y = nodes[None, :] - y0 + s_eps
        out[j] = big_y * omega0[None, :] / ctx.beta2 - rho0[None, :] + conv
    return out


def lap_reconstruct_t0(ctx: KernelContext, grid: GridSpec, eps_sequence=DEFAULT_EPS_SEQUENCE,
                       y0_extension: float = 0.0) -> ComplexField:
    """
    psi(0, y) = (1/2 pi i) int (psi^- - psi^+) dy0 for each eps, extrapolated linearly to
    eps = 0 from the two smallest eps. The y0 lattice is the grid, extended by y0_extension
    on both sides at the grid spacing.
    """
    eps = sorted((float(e) for e in eps_sequence), reverse=True)
    if len(eps) < 2 or eps[-1] <= 0:
        raise DomainError("need at least two positive eps values", {"eps_sequence": eps_sequence})
    if ctx.is_zero:
        return ComplexField(grid=grid, values=np.zeros(grid.n_points), time=0.0)

    lattice = LapLattice.around(grid, y0_extension)
    n_ext = (lattice.n_points - grid.n_points) // 2
    window = slice(n_ext, n_ext + grid.n_points)
    h = lattice.spacing

    recon = []
    for e in eps:
        diff = lattice_stream(ctx, lattice, e, -1) - lattice_stream(ctx, lattice, e, 1)
        weights = np.full(lattice.n_points, h)
        weights[[0, -1]] *= 0.5
        psi = (weights @ diff) / (2j * math.pi)
        recon.append(psi[window])
        logger.debug("LAP reconstruction at eps=%g done", e)

    changes = [float(np.linalg.norm(b - a)) for a, b in zip(recon[:-1], recon[1:])]
    if len(changes) >= 2 and not changes[-1] < changes[0]:
        raise NonConvergenceError("LAP reconstruction does not settle as eps shrinks",
                                  {"eps": eps, "changes": changes})
    ratio = eps[-2] / eps[-1]
    extrapolated = (ratio * recon[-1] - recon[-2]) / (ratio - 1.0)
    return ComplexField(grid=grid, values=extrapolated, time=0.0)
