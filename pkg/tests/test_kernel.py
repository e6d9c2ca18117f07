import numpy as np
import pytest

from stratcouette.backend.core_types import make_initial_data
from stratcouette.backend.errors import DomainError
from stratcouette.backend.kernel import g_kernel, g_kernel_deta, g_kernel_dy, h_source, phi_derivatives


def test_translation_identity(make_ctx):
    ctx = make_ctx(0.4, 1)
    rng = np.random.default_rng(7)
    eta, xi, y, h = (rng.uniform(-3, 3, 50) for _ in range(4))
    lhs = g_kernel(ctx, eta + h, xi, y + h)
    rhs = g_kernel(ctx, eta, xi, y)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-14)


def test_kernel_closed_form_for_gaussian():
    # omega0 = e^{-y^2}, rho0 = 0, beta = 1, m = 1
    from stratcouette.backend.core_types import derive_params
    from stratcouette.backend.kernel import KernelContext

    ctx = KernelContext(params=derive_params(1.0, 1), data=make_initial_data(omega_amplitude=1.0, rho_amplitude=0.0))
    eta, xi, y = 0.3, 0.8, -0.2
    z = xi + y - eta
    f = np.exp(-z * z)
    om2 = (4 * z * z - 2) * f - f
    d1 = -2 * z * f
    expected = -(xi * om2 + 2 * d1)
    assert g_kernel(ctx, eta, xi, y) == pytest.approx(expected, rel=1e-13)


def test_kernel_density_only_at_origin():
    # omega0 = 0, rho0 = e^{-y^2}: rho0''(0) - rho0(0) = -3
    from stratcouette.backend.core_types import derive_params
    from stratcouette.backend.kernel import KernelContext

    ctx = KernelContext(params=derive_params(1.0, 1), data=make_initial_data(omega_amplitude=0.0, rho_amplitude=1.0))
    assert g_kernel(ctx, 0.0, 0.0, 0.0) == pytest.approx(-3.0, rel=1e-13)


def test_eta_derivatives_match_finite_differences(make_ctx):
    ctx = make_ctx(1.0, 2)
    eta, xi, y, h = 0.4, 1.1, 0.25, 1e-5
    d1 = g_kernel_deta(ctx, eta, xi, y, 1)
    fd1 = (g_kernel(ctx, eta + h, xi, y) - g_kernel(ctx, eta - h, xi, y)) / (2 * h)
    assert d1 == pytest.approx(fd1, rel=1e-7)
    d2 = g_kernel_deta(ctx, eta, xi, y, 2)
    fd2 = (g_kernel_deta(ctx, eta + h, xi, y, 1) - g_kernel_deta(ctx, eta - h, xi, y, 1)) / (2 * h)
    assert d2 == pytest.approx(fd2, rel=1e-7)


def test_y_derivative_is_minus_eta_derivative(make_ctx):
    ctx = make_ctx()
    for k in (1, 2):
        dy = g_kernel_dy(ctx, 0.2, 0.5, 0.1, k)
        deta = g_kernel_deta(ctx, 0.2, 0.5, 0.1, k)
        assert dy == pytest.approx((-1) ** k * deta)


def test_h_source_at_zero_eps_is_the_kernel(make_ctx):
    ctx = make_ctx(0.4, 1)
    z = np.linspace(-2, 2, 11)
    y0 = 0.35
    for sign in (1, -1):
        h = h_source(ctx, z, y0, 0.0, sign)
        g = g_kernel(ctx, 0.0, z - y0, y0)
        assert np.allclose(h, g, rtol=1e-14, atol=1e-15)


def test_h_source_shift_is_linear_in_eps(make_ctx):
    ctx = make_ctx(0.4, 1)
    z, y0, eps = 0.3, 0.1, 0.05
    om = ctx.data.omega0.derivatives(z, order=2)
    om2 = om[2] - ctx.m ** 2 * om[0]
    diff = h_source(ctx, z, y0, eps, 1) - h_source(ctx, z, y0, eps, -1)
    assert diff == pytest.approx(-2j * eps * om2 / ctx.beta2, rel=1e-12)


def test_zero_data_gives_zero(make_ctx):
    ctx = make_ctx(data=make_initial_data(omega_amplitude=0.0, rho_amplitude=0.0))
    assert g_kernel(ctx, 0.1, 0.2, 0.3) == 0
    assert h_source(ctx, 0.1, 0.0, 0.1, 1) == 0


def test_argument_validation(make_ctx):
    ctx = make_ctx()
    with pytest.raises(DomainError):
        g_kernel_deta(ctx, 0.1, 0.2, 0.3, 3)
    with pytest.raises(DomainError):
        h_source(ctx, 0.1, 0.0, 0.1, 0)
    with pytest.raises(DomainError):
        h_source(ctx, 0.1, 0.0, -0.1, 1)
    with pytest.raises(DomainError):
        phi_derivatives(ctx, 0.0, 0.0, 3)
