import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import eval_sh_legendre

from stratcouette.backend.core_types import derive_params, make_quadrature_spec
from stratcouette.backend.errors import DomainError
from stratcouette.backend.oscquad import (
    InnerTable,
    OuterWeight,
    check_amplification,
    filon_rule,
    gauss_rule,
    inner_integral,
    outer_oscillatory,
    outer_rule,
    plan_panels,
    product_rule,
    shifted_legendre_moments,
    singular_rule,
    weight_values,
)
from stratcouette.backend.specfun import scaled_w


def cquad(func, a, b, points=None):
    opts = {"limit": 400, "epsabs": 1e-14, "epsrel": 1e-12}
    re = integrate.quad(lambda x: func(x).real, a, b, points=points, **opts)[0]
    im = integrate.quad(lambda x: func(x).imag, a, b, points=points, **opts)[0]
    return re + 1j * im


# -------------------------------------------------
# Elementary rules
# -------------------------------------------------

def test_shifted_legendre_moments_against_quad():
    p = 0.3
    moments, log_moments = shifted_legendre_moments(p, 6)
    for k in range(6):
        ref = integrate.quad(lambda s: s ** p * eval_sh_legendre(k, s), 0, 1, epsabs=1e-14)[0]
        ref_log = integrate.quad(lambda s: s ** p * math.log(s) * eval_sh_legendre(k, s), 0, 1, epsabs=1e-14)[0]
        assert moments[k] == pytest.approx(ref, abs=1e-12)
        assert log_moments[k] == pytest.approx(ref_log, abs=1e-11)


def test_moments_reject_nonintegrable_exponent():
    with pytest.raises(DomainError):
        shifted_legendre_moments(-1.0, 4)


@pytest.mark.parametrize("p", [0.2, -0.5, 0.5 + 0.866j])
def test_product_rule_exact_for_polynomials(p):
    a = 0.4
    x, v = product_rule(a, 8, p, 0)
    # int_0^a x^p (1 + 2x + 3x^2) dx
    exact = sum(c * a ** (p + k + 1) / (p + k + 1) for k, c in enumerate((1.0, 2.0, 3.0)))
    assert np.sum(v * (1 + 2 * x + 3 * x * x)) == pytest.approx(exact, rel=1e-12)


def test_product_rule_with_log():
    a, p = 0.5, 0.5
    x, v = product_rule(a, 8, p, 1)
    # int_0^a x^p log x dx
    exact = a ** (p + 1) * (math.log(a) / (p + 1) - 1 / (p + 1) ** 2)
    assert np.sum(v) == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("omega", [0.0, 3.0, -40.0, 500.0])
def test_filon_rule_against_quad(omega):
    a, b = 0.5, 1.0
    x, v = filon_rule(a, b, 16, omega)

    def f(s):
        return np.exp(-s) * np.cos(2 * s)

    ref = cquad(lambda s: np.exp(1j * omega * s) * f(s), a, b)
    assert np.sum(v * f(x)) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_gauss_rule_integrates_exponential():
    x, w = gauss_rule(0.0, 1.0, 12)
    assert np.sum(w * np.exp(x)) == pytest.approx(math.e - 1, rel=1e-14)


@pytest.mark.parametrize("beta", [0.4, 0.5, 1.0])
@pytest.mark.parametrize("weight", list(OuterWeight))
def test_singular_rule_against_quad(beta, weight):
    p = derive_params(beta, 1)
    a, omega = 0.25, 6.0
    x, v = singular_rule(p, a, 16, weight, omega)

    def integrand(s):
        return np.exp(1j * omega * s) * complex(weight_values(p, weight, np.array([s]))[0]) * np.cos(s)

    ref = cquad(integrand, 0.0, a)
    assert np.sum(v * np.cos(x)) == pytest.approx(ref, rel=1e-7)


# -------------------------------------------------
# Plans and outer rules
# -------------------------------------------------

def test_plan_panels_cover_the_interval():
    p = derive_params(0.4, 1)
    spec = make_quadrature_spec(p)
    plan = plan_panels(p, 50.0, spec)
    assert plan.split_delta == pytest.approx(1 / 200)
    panels = plan.singular_panels + plan.oscillatory_panels
    assert panels[0][0] == 0.0
    assert panels[-1][1] == pytest.approx(spec.eta_max)
    for (a0, b0, _), (a1, b1, _) in zip(panels[:-1], panels[1:]):
        assert b0 == pytest.approx(a1)
        assert b1 > a1


def test_plan_panels_small_time_uses_delta0():
    p = derive_params(1.0, 1)
    spec = make_quadrature_spec(p)
    plan = plan_panels(p, 0.0, spec)
    assert plan.split_delta == pytest.approx(0.25)
    with pytest.raises(DomainError):
        plan_panels(p, -1.0, spec)


@pytest.mark.parametrize("beta", [0.4, 1.0])
def test_outer_rule_against_quad(beta):
    p = derive_params(beta, 1)
    spec = make_quadrature_spec(p, eta_max=6.0)
    t = 2.0
    plan = plan_panels(p, t, spec)
    rule = outer_rule(p, plan, spec, OuterWeight.W, 1)

    def integrand(s):
        return np.exp(1j * t * s) * complex(scaled_w(p.gamma, 1, s)[0]) * np.exp(-s)

    ref = cquad(integrand, 0.0, 6.0, points=[plan.split_delta, spec.delta0])
    assert np.sum(rule.weights * np.exp(-rule.nodes)) == pytest.approx(ref, rel=1e-8)


# -------------------------------------------------
# Inner integrals and tables
# -------------------------------------------------

def test_inner_integral_against_quad(make_ctx):
    ctx = make_ctx(0.4, 1)
    spec = make_quadrature_spec(ctx.params)
    eta, y = 0.7, 0.2
    from stratcouette.backend.kernel import g_kernel

    def integrand(xi):
        return complex(scaled_w(ctx.params.gamma, 1, xi)[0]) * g_kernel(ctx, eta, xi, y)

    ref = cquad(integrand, 0.0, spec.xi_max, points=[spec.delta0, 4.0])
    assert inner_integral(ctx, eta, y, 1, spec) == pytest.approx(ref, rel=1e-8)


def test_inner_table_matches_direct(make_ctx):
    ctx = make_ctx(1.0, 1)
    spec = make_quadrature_spec(ctx.params)
    table = InnerTable(ctx, spec, -1.0, 1.0)
    eta = np.array([0.05, 0.6, 2.3])
    y = 0.4
    for sign in (1, -1):
        direct = inner_integral(ctx, eta, y, sign, spec)
        tabulated = table.evaluate(sign, y - sign * eta)[:, 0]
        assert np.allclose(tabulated, direct, rtol=1e-8, atol=1e-12)


def test_inner_table_derivatives(make_ctx):
    ctx = make_ctx(0.4, 1)
    spec = make_quadrature_spec(ctx.params)
    table = InnerTable(ctx, spec, -1.0, 1.0)
    s, h = np.array([-0.3, 0.2]), 1e-4
    vals = table.evaluate(1, s)
    fd = (table.evaluate(1, s + h)[:, 0] - table.evaluate(1, s - h)[:, 0]) / (2 * h)
    assert np.allclose(vals[:, 1], fd, rtol=1e-6, atol=1e-9)


def test_outer_oscillatory_zero_data(make_ctx):
    from stratcouette.backend.core_types import make_initial_data

    ctx = make_ctx(data=make_initial_data(omega_amplitude=0.0))
    spec = make_quadrature_spec(ctx.params)
    assert outer_oscillatory(ctx, 1.0, 0.3, OuterWeight.W, 1, 1, spec) == 0


def test_amplification_limit():
    check_amplification(derive_params(1.0, 1))
    with pytest.raises(DomainError):
        check_amplification(derive_params(12.0, 1))


# -------------------------------------------------
# Outer integral properties
# -------------------------------------------------

OUTER_Y = np.array([-1.0, 0.0, 0.5])
OUTER_TOL = 1e-6


def rel_gap(a, b):
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(b))), 1e-300))


@pytest.mark.parametrize("beta", [0.4, 0.5, 1.0])
@pytest.mark.parametrize("t", [0.0, 1.0, 10.0, 100.0])
@pytest.mark.parametrize("weight", [OuterWeight.W, OuterWeight.W_OVER_ETA])
def test_outer_oscillatory_refinement_converges(make_ctx, beta, t, weight):
    ctx = make_ctx(beta, 1)
    spec = make_quadrature_spec(ctx.params)
    coarse = outer_oscillatory(ctx, t, OUTER_Y, weight, 1, 1, spec)
    fine = outer_oscillatory(ctx, t, OUTER_Y, weight, 1, 1, spec.refined())
    assert rel_gap(coarse, fine) < OUTER_TOL


@pytest.mark.parametrize("arg_sign", [1, -1])
@pytest.mark.parametrize("weight", list(OuterWeight))
def test_outer_oscillatory_phase_conjugation(make_ctx, arg_sign, weight):
    ctx = make_ctx(0.4, 1)
    spec = make_quadrature_spec(ctx.params)
    plus = outer_oscillatory(ctx, 3.0, OUTER_Y, weight, 1, arg_sign, spec)
    minus = outer_oscillatory(ctx, 3.0, OUTER_Y, weight, -1, arg_sign, spec)
    assert np.allclose(minus, np.conj(plus), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("beta", [0.4, 0.5, 1.0])
@pytest.mark.parametrize("weight", list(OuterWeight))
def test_outer_oscillatory_split_point_robust(make_ctx, beta, weight):
    ctx = make_ctx(beta, 1)
    spec = make_quadrature_spec(ctx.params)
    t = 10.0
    delta = plan_panels(ctx.params, t, spec).split_delta
    assert 2 * delta <= spec.delta0
    base = outer_oscillatory(ctx, t, OUTER_Y, weight, 1, 1, spec, split_delta=delta)
    moved = outer_oscillatory(ctx, t, OUTER_Y, weight, 1, 1, spec, split_delta=2 * delta)
    assert rel_gap(moved, base) < 2 * OUTER_TOL
