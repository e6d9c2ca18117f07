"""
Source kernels built from the initial data.

- G(eta, xi, y): the kernel of the explicit solution formulas
- the eta-derivatives of G (equivalently minus its y-derivatives)
- H+-(z, y0): the limiting-absorption source

All three are one function of two variables,
    phi(xi, z) = R(z) - (xi * Om(z) + 2 omega0'(z)) / beta^2,
with R = rho0'' - m^2 rho0 and Om = omega0'' - m^2 omega0, evaluated at
z = xi + y - eta (for G) or with xi = z - y0 +- i eps (for H).
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from stratcouette.backend.core_types import FlowParams, InitialDataProfile
from stratcouette.backend.errors import DomainError

logger = logging.getLogger(__name__)


class KernelContext(BaseModel):
    """Flow parameters together with the initial data of one mode."""

    model_config = ConfigDict(frozen=True)

    params: FlowParams
    data: InitialDataProfile

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def beta2(self) -> float:
        return self.params.beta2

    @property
    def is_zero(self) -> bool:
        return self.data.is_zero

    def scaled(self, factor: float) -> "KernelContext":
        return KernelContext(params=self.params, data=self.data.scaled(factor))


def _as_complex(value: np.ndarray, *args):
    if all(np.ndim(a) == 0 for a in args):
        return complex(value)
    return value.astype(complex)


def phi_derivatives(ctx: KernelContext, xi, z, order: int = 0) -> list[np.ndarray]:
    """
    z-derivatives of phi(xi, z) for k = 0..order (order <= 2), broadcasting xi against z.
    xi may be complex.
    """
    if not 0 <= order <= 2:
        raise DomainError("phi derivatives are available up to order 2", {"order": order})
    z = np.asarray(z, dtype=float)
    xi = np.asarray(xi)
    m2 = ctx.m ** 2
    rho = ctx.data.rho0.derivatives(z, order=order + 2)
    om = ctx.data.omega0.derivatives(z, order=min(order + 2, 4))

    out = []
    for k in range(order + 1):
        r_k = rho[k + 2] - m2 * rho[k]
        om_k = om[k + 2] - m2 * om[k]
        out.append(r_k - (xi * om_k + 2.0 * om[k + 1]) / ctx.beta2)
    return out


def g_kernel(ctx: KernelContext, eta, xi, y):
    """G(eta, xi, y) = phi(xi, xi + y - eta)."""
    z = np.asarray(xi, dtype=float) + np.asarray(y, dtype=float) - np.asarray(eta, dtype=float)
    return _as_complex(phi_derivatives(ctx, xi, z, 0)[0], eta, xi, y)


def g_kernel_deta(ctx: KernelContext, eta, xi, y, order: int = 1):
    """d^k G / d eta^k = (-1)^k d^k phi / dz^k at fixed xi."""
    if order not in (1, 2):
        raise DomainError("g_kernel_deta needs order 1 or 2", {"order": order})
    z = np.asarray(xi, dtype=float) + np.asarray(y, dtype=float) - np.asarray(eta, dtype=float)
    value = phi_derivatives(ctx, xi, z, order)[order]
    return _as_complex((-1.0) ** order * value, eta, xi, y)


def g_kernel_dy(ctx: KernelContext, eta, xi, y, order: int = 1):
    """d^k G / dy^k, the translation identity turns it into -d/d eta."""
    return (-1.0) ** order * g_kernel_deta(ctx, eta, xi, y, order)


def h_source(ctx: KernelContext, z, y0, epsilon: float, sign: int):
    """
    H+-(z, y0) = Delta_m rho0(z) - Delta_m((z - y0 +- i eps) omega0(z)) / beta^2.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1", {"sign": sign})
    if epsilon < 0:
        raise DomainError("h_source needs epsilon >= 0", {"epsilon": epsilon})
    zz = np.asarray(z, dtype=float)
    shift = zz - np.asarray(y0, dtype=float) + 1j * sign * epsilon
    value = phi_derivatives(ctx, shift, zz, 0)[0]
    return _as_complex(value, z, y0)
