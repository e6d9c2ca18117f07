"""
Quadrature engine for the singular oscillatory integrals of the explicit solution.

Inner integrals
    I+(eta, y) = int_0^xi_max W(xi) G(eta, xi, y) dxi       = J+(y - eta)
    I-(eta, y) = int_0^xi_max W(xi) G(-eta, -xi, y) dxi     = J-(y + eta)
are functions of one shifted variable (translation identity), so J+- and
their first two derivatives are tabulated once and spline-interpolated.

Outer integrals
    int_0^eta_max exp(+-i m eta t) w(eta) J(y -+ eta) d eta,  w in {W, W/eta, W'}
are discrete linear functionals: a PanelPlan (geometry) plus an OuterRule
(nodes and complex weights, phase and w folded into the weights).

Panels:
- (0, delta]: product integration against the eta^p (log eta)^l components of w
- [delta, delta0]: geometrically graded Filon-Legendre panels
- [delta0, eta_max]: uniform Filon-Legendre panels
"""

import logging
import math
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander
from pydantic import BaseModel, ConfigDict
from scipy.interpolate import make_interp_spline
from scipy.special import spherical_jn

from stratcouette.backend.core_types import FlowParams, QuadratureSpec
from stratcouette.backend.errors import DomainError, ToleranceNotMetError
from stratcouette.backend.kernel import KernelContext, phi_derivatives
from stratcouette.backend.specfun import scaled_w, whittaker_components

logger = logging.getLogger(__name__)

# |cos(gamma pi)| above this amplifies quadrature noise past double precision
AMPLIFICATION_LIMIT = 1e12

TABLE_BLOCK = 256
TABLE_PAD = 6


class OuterWeight(str, Enum):
    W = "W"
    W_OVER_ETA = "W_over_eta"
    W_PRIME = "W_prime"


# -------------------------------------------------
# Elementary rules
# -------------------------------------------------

@lru_cache(maxsize=64)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    u, w = leggauss(n)
    return u, w, legvander(u, n - 1)


def shifted_legendre_moments(exponent: complex, n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    M_k = int_0^1 s^p P~_k(s) ds = prod_{j<k}(p - j) / prod_{j=1}^{k+1}(p + j)
    and its p-derivative L_k = int_0^1 s^p log(s) P~_k(s) ds, k = 0..n-1.
    """
    p = complex(exponent)
    if p.real <= -1:
        raise DomainError("moment exponent needs Re p > -1", {"exponent": p})
    moments = np.empty(n, dtype=complex)
    log_moments = np.empty(n, dtype=complex)
    for k in range(n):
        num_factors = [p - j for j in range(k)]
        den_factors = [p + j for j in range(1, k + 2)]
        num = np.prod(num_factors) if num_factors else 1.0 + 0j
        den = np.prod(den_factors)
        # product rule, safe when one numerator factor vanishes
        dnum = sum(np.prod(num_factors[:i] + num_factors[i + 1:]) for i in range(k)) if k else 0j
        dden = sum(np.prod(den_factors[:i] + den_factors[i + 1:]) for i in range(k + 1))
        moments[k] = num / den
        log_moments[k] = (dnum * den - num * dden) / (den * den)
    return moments, log_moments


def product_rule(a: float, n: int, exponent: complex, log_power: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Nodes x_j in (0, a] and weights v_j with
    int_0^a x^p (log x)^l f(x) dx ~= sum v_j f(x_j) for smooth f.
    """
    if log_power not in (0, 1):
        raise DomainError("log_power must be 0 or 1", {"log_power": log_power})
    u, w, vander = _legendre(n)
    x = 0.5 * a * (u + 1.0)
    moments, log_moments = shifted_legendre_moments(exponent, n)
    coeff = moments if log_power == 0 else math.log(a) * moments + log_moments
    k = np.arange(n)
    scale = np.exp((complex(exponent) + 1.0) * math.log(a))
    weights = scale * w * (vander @ (0.5 * (2 * k + 1) * coeff))
    return x, weights


def filon_rule(a: float, b: float, n: int, omega: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Filon-Legendre rule: int_a^b exp(i omega x) f(x) dx ~= sum v_j f(x_j),
    exact for polynomial f of degree < n.
    """
    u, w, vander = _legendre(n)
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    theta = omega * half
    k = np.arange(n)
    jk = spherical_jn(k, abs(theta))
    if theta < 0:
        jk = jk * (-1.0) ** k
    coeff = (2 * k + 1) * (1j ** k) * jk
    weights = half * np.exp(1j * omega * center) * w * (vander @ coeff)
    return center + half * u, weights


def gauss_rule(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    u, w, _ = _legendre(n)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * u, half * w


# -------------------------------------------------
# Weights w(eta)
# -------------------------------------------------

def weight_values(params: FlowParams, weight: OuterWeight, eta: np.ndarray) -> np.ndarray:
    """w(eta) for eta > 0, with W(eta) = W_{0,gamma}(2 m eta)."""
    weight = OuterWeight(weight)
    if weight is OuterWeight.W_PRIME:
        return scaled_w(params.gamma, params.m, eta, order=1)[1]
    w0 = scaled_w(params.gamma, params.m, eta, order=0)[0]
    if weight is OuterWeight.W_OVER_ETA:
        return w0 / eta
    return w0


def singular_rule(params: FlowParams, a: float, n: int, weight: OuterWeight,
                  omega: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """
    int_0^a exp(i omega eta) w(eta) f(eta) d eta ~= sum v_j f(eta_j) with w split
    into eta^p (log eta)^l g(eta); exp(i omega eta) g(eta) f(eta) is interpolated.
    """
    nodes = 0.5 * a * (_legendre(n)[0] + 1.0)
    total = np.zeros(n, dtype=complex)
    for p, l, g in whittaker_components(params.gamma, params.m, nodes, OuterWeight(weight).value):
        _, v = product_rule(a, n, p, l)
        total += v * g
    return nodes, total * np.exp(1j * omega * nodes)


# -------------------------------------------------
# Panel plans and outer rules
# -------------------------------------------------

class PanelPlan(BaseModel):
    """
    Partition of (0, eta_max]: one endpoint-singular panel (a, b, envelope exponent)
    followed by oscillatory panels (a, b, local frequency m t).
    """

    model_config = ConfigDict(frozen=True)

    split_delta: float
    frequency: float
    singular_panels: list[tuple[float, float, float]]
    oscillatory_panels: list[tuple[float, float, float]]

    @property
    def panel_count(self) -> int:
        return len(self.singular_panels) + len(self.oscillatory_panels)


def plan_panels(params: FlowParams, t: float, spec: QuadratureSpec,
                split_delta: float | None = None) -> PanelPlan:
    if t < 0:
        raise DomainError("time must be nonnegative", {"t": t})
    m = params.m
    delta = split_delta if split_delta is not None else min(1.0 / (4.0 * m * max(t, 1.0)), spec.delta0)
    if not 0 < delta <= spec.delta0:
        raise DomainError("split point must lie in (0, delta0]", {"split_delta": delta, "delta0": spec.delta0})
    freq = m * t

    singular = [(0.0, delta, 0.5 - params.mu)]
    oscillatory = []
    if delta < spec.delta0:
        n_geo = max(1, math.ceil(spec.panels_per_decade * math.log10(spec.delta0 / delta) - 1e-12))
        edges = delta * (spec.delta0 / delta) ** (np.arange(n_geo + 1) / n_geo)
        edges[-1] = spec.delta0
        oscillatory += [(float(a), float(b), freq) for a, b in zip(edges[:-1], edges[1:])]
    n_uni = max(1, math.ceil((spec.eta_max - spec.delta0) / spec.panel_width - 1e-12))
    edges = np.linspace(spec.delta0, spec.eta_max, n_uni + 1)
    oscillatory += [(float(a), float(b), freq) for a, b in zip(edges[:-1], edges[1:])]

    plan = PanelPlan(split_delta=delta, frequency=freq, singular_panels=singular, oscillatory_panels=oscillatory)
    logger.debug("panel plan t=%g: delta=%.3g, %d panels", t, delta, plan.panel_count)
    return plan


class OuterRule(BaseModel):
    """Nodes and complex weights of one outer functional."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: np.ndarray
    weights: np.ndarray
    weight: OuterWeight
    phase_sign: int


def outer_rule(params: FlowParams, plan: PanelPlan, spec: QuadratureSpec,
               weight: OuterWeight, phase_sign: int) -> OuterRule:
    """int_0^eta_max exp(phase_sign i m t eta) w(eta) f(eta) d eta ~= sum v_j f(eta_j)."""
    if phase_sign not in (1, -1):
        raise DomainError("phase_sign must be +1 or -1", {"phase_sign": phase_sign})
    weight = OuterWeight(weight)
    nodes, weights = [], []
    for a, b, _ in plan.singular_panels:
        x, v = singular_rule(params, b, spec.jacobi_order, weight, phase_sign * plan.frequency)
        nodes.append(x)
        weights.append(v)
    for a, b, freq in plan.oscillatory_panels:
        x, v = filon_rule(a, b, spec.filon_order, phase_sign * freq)
        nodes.append(x)
        weights.append(v * weight_values(params, weight, x))
    return OuterRule(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        weight=weight,
        phase_sign=phase_sign,
    )


def inner_rule(params: FlowParams, spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """int_0^xi_max W(xi) f(xi) d xi ~= sum c_j f(xi_j)."""
    nodes, weights = [], []
    x, v = singular_rule(params, spec.delta0, spec.jacobi_order, OuterWeight.W)
    nodes.append(x)
    weights.append(v)
    n_pan = max(1, math.ceil((spec.xi_max - spec.delta0) / spec.panel_width - 1e-12))
    edges = np.linspace(spec.delta0, spec.xi_max, n_pan + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        x, v = gauss_rule(a, b, spec.legendre_order)
        nodes.append(x)
        weights.append(v * weight_values(params, OuterWeight.W, x))
    return np.concatenate(nodes), np.concatenate(weights)


# -------------------------------------------------
# Inner integrals
# -------------------------------------------------

def _inner_direct(ctx: KernelContext, spec: QuadratureSpec, shifted, arg_sign: int, order: int = 0):
    """J_sign(s) and derivatives by direct quadrature, s an array. Returns shape (order+1, len(s))."""
    xi, c = inner_rule(ctx.params, spec)
    s = np.atleast_1d(np.asarray(shifted, dtype=float))
    out = np.zeros((order + 1, s.size), dtype=complex)
    scale = np.zeros(s.size)
    for start in range(0, s.size, TABLE_BLOCK):
        sb = s[start:start + TABLE_BLOCK]
        z = sb[:, None] + arg_sign * xi[None, :]
        vals = phi_derivatives(ctx, arg_sign * xi[None, :], z, order)
        for k in range(order + 1):
            out[k, start:start + TABLE_BLOCK] = vals[k] @ c
        scale[start:start + TABLE_BLOCK] = np.abs(vals[0]) @ np.abs(c)
    return out, scale


def inner_integral(ctx: KernelContext, eta, y, sign: int, spec: QuadratureSpec):
    """
    int_0^xi_max W(xi) G(sign eta, sign xi, y) d xi.
    With spec.check_refinement the result is recomputed on the refined rule and
    ToleranceNotMetError is raised when the two differ by more than the tolerance.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1", {"sign": sign})
    eta_arr = np.asarray(eta, dtype=float)
    if np.any(eta_arr < 0):
        raise DomainError("inner_integral needs eta >= 0", {"eta": eta})
    spec.validate_for(ctx.params)
    s = np.asarray(y, dtype=float) - sign * eta_arr
    shape = s.shape
    if ctx.is_zero:
        value = np.zeros(shape, dtype=complex)
    else:
        value, scale = _inner_direct(ctx, spec, s.ravel(), sign)
        value = value[0]
        if spec.check_refinement:
            fine, _ = _inner_direct(ctx, spec.refined(), s.ravel(), sign)
            achieved = float(np.max(np.abs(fine[0] - value) / np.maximum(scale, 1e-300)))
            if achieved > spec.tolerance:
                raise ToleranceNotMetError("inner integral refinement estimate too large",
                                           achieved, spec.tolerance)
        value = value.reshape(shape)
    return complex(value) if value.ndim == 0 else value


class InnerTable:
    """
    J+- with first and second derivatives on a uniform s-grid, interpolated by
    quintic splines. Values outside the tabulated (support) range are zero.
    """

    def __init__(self, ctx: KernelContext, spec: QuadratureSpec, y_lo: float, y_hi: float):
        self.ctx = ctx
        self.spec = spec
        self.y_lo = y_lo
        self.y_hi = y_hi
        self._splines = {}
        self._ranges = {}
        if ctx.is_zero:
            return

        lo, hi = ctx.data.support()
        needed = {
            1: (y_lo - spec.eta_max, y_hi),
            -1: (y_lo, y_hi + spec.eta_max),
        }
        supported = {
            1: (lo - spec.xi_max, hi),
            -1: (lo, hi + spec.xi_max),
        }
        xi, c = inner_rule(ctx.params, spec)
        for sign in (1, -1):
            a = max(needed[sign][0], supported[sign][0])
            b = min(needed[sign][1], supported[sign][1])
            if a >= b:
                continue
            h = spec.table_spacing
            a -= TABLE_PAD * h
            b += TABLE_PAD * h
            n = math.ceil((b - a) / h) + 1
            s = np.linspace(a, a + (n - 1) * h, n)
            values = self._tabulate(xi, c, s, sign, lo, hi)
            stacked = np.concatenate([values.real, values.imag], axis=1)
            self._splines[sign] = make_interp_spline(s, stacked, k=5)
            self._ranges[sign] = (s[0], s[-1])
            logger.debug("inner table sign=%+d: %d points on [%.3f, %.3f]", sign, n, s[0], s[-1])

    def _tabulate(self, xi, c, s, sign, lo, hi) -> np.ndarray:
        out = np.zeros((s.size, 3), dtype=complex)
        for start in range(0, s.size, TABLE_BLOCK):
            sb = s[start:start + TABLE_BLOCK]
            # z = s + sign * xi must meet the data support
            if sign == 1:
                keep = (xi >= lo - sb[-1]) & (xi <= hi - sb[0])
            else:
                keep = (xi >= sb[0] - hi) & (xi <= sb[-1] - lo)
            if not np.any(keep):
                continue
            xk = xi[keep]
            z = sb[:, None] + sign * xk[None, :]
            vals = phi_derivatives(self.ctx, sign * xk[None, :], z, 2)
            for k in range(3):
                out[start:start + TABLE_BLOCK, k] = vals[k] @ c[keep]
        return out

    def covers(self, y_lo: float, y_hi: float) -> bool:
        return self.y_lo <= y_lo and y_hi <= self.y_hi

    def evaluate(self, sign: int, s: np.ndarray) -> np.ndarray:
        """Array of shape s.shape + (3,) holding J, J', J''."""
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape + (3,), dtype=complex)
        spline = self._splines.get(sign)
        if spline is None:
            return out
        a, b = self._ranges[sign]
        inside = (s >= a) & (s <= b)
        if np.any(inside):
            raw = spline(s[inside])
            out[inside] = raw[:, :3] + 1j * raw[:, 3:]
        return out


# -------------------------------------------------
# Outer integrals
# -------------------------------------------------

def check_amplification(params: FlowParams) -> None:
    amp = abs(params.cos_gamma_pi)
    if amp > AMPLIFICATION_LIMIT:
        raise DomainError("|cos(gamma pi)| amplification exceeds 1e12", {"amplification": amp, "beta": params.beta})


def apply_rule(table: InnerTable, rule: OuterRule, arg_sign: int, y: np.ndarray,
               derivative: int = 0, chunk: int = 64) -> np.ndarray:
    """sum_j v_j J^(derivative)_{arg}(y - arg * eta_j) for every y."""
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape, dtype=complex)
    flat_y = y.ravel()
    flat_out = out.reshape(-1)
    for start in range(0, flat_y.size, chunk):
        yb = flat_y[start:start + chunk]
        vals = table.evaluate(arg_sign, yb[:, None] - arg_sign * rule.nodes[None, :])
        flat_out[start:start + chunk] = vals[..., derivative] @ rule.weights
    return out


@lru_cache(maxsize=8)
def _cached_table(ctx: KernelContext, spec: QuadratureSpec, y_lo: float, y_hi: float) -> InnerTable:
    return InnerTable(ctx, spec, y_lo, y_hi)


def _oscillatory(ctx, t, y, weight, phase_sign, arg_sign, spec, split_delta=None):
    y_arr = np.asarray(y, dtype=float)
    table = _cached_table(ctx, spec, float(np.min(y_arr)), float(np.max(y_arr)))
    plan = plan_panels(ctx.params, t, spec, split_delta)
    rule = outer_rule(ctx.params, plan, spec, weight, phase_sign)
    return apply_rule(table, rule, arg_sign, y_arr)


def outer_oscillatory(ctx: KernelContext, t: float, y, weight: OuterWeight, phase_sign: int,
                      arg_sign: int, spec: QuadratureSpec, split_delta: float | None = None):
    """
    int_0^eta_max exp(phase_sign i m eta t) w(eta) I_arg(eta, y) d eta, where
    I_+ = int W(xi) G(eta, xi, y) d xi and I_- = int W(xi) G(-eta, -xi, y) d xi.
    """
    if arg_sign not in (1, -1):
        raise DomainError("arg_sign must be +1 or -1", {"arg_sign": arg_sign})
    spec.validate_for(ctx.params)
    check_amplification(ctx.params)
    y_arr = np.asarray(y, dtype=float)
    if ctx.is_zero:
        value = np.zeros(y_arr.shape, dtype=complex)
    else:
        value = _oscillatory(ctx, t, y_arr, weight, phase_sign, arg_sign, spec, split_delta)
        if spec.check_refinement:
            fine = _oscillatory(ctx, t, y_arr, weight, phase_sign, arg_sign, spec.refined(), split_delta)
            achieved = float(np.max(np.abs(fine - value)) / max(float(np.max(np.abs(fine))), 1e-300))
            if achieved > spec.tolerance:
                raise ToleranceNotMetError("outer integral refinement estimate too large",
                                           achieved, spec.tolerance)
    return complex(value) if value.ndim == 0 else value
