import math

import numpy as np
import pytest

from stratcouette.backend.core_types import ComplexField, derive_params, make_grid, make_initial_data, sobolev_q
from stratcouette.backend.damping import (
    DecaySeries,
    Quantity,
    bound_constants,
    decay_series,
    expected_exponent,
    fit_decay,
    mode_l2,
    prefactor_ratio,
)
from stratcouette.backend.errors import DomainError

TIMES = np.geomspace(10.0, 1000.0, 12)


def synthetic(alpha, log=False, amplitude=2.0, quantity="ux"):
    norms = amplitude * TIMES ** (-alpha)
    if log:
        norms = norms * (1 + np.log(TIMES))
    return DecaySeries(quantity=quantity, times=TIMES, norms=norms)


# -------------------------------------------------
# Norms
# -------------------------------------------------

def test_mode_l2_examples():
    zero = ComplexField(grid=make_grid(0, 1, 21), values=np.zeros(21))
    assert mode_l2(zero) == 0.0
    const = ComplexField(grid=make_grid(0, 1, 101), values=np.ones(101))
    assert mode_l2(const, edge_tol=None) == pytest.approx(1.0, abs=1e-12)
    grid = make_grid(-10, 10, 2001)
    y = grid.nodes()
    gauss = ComplexField(grid=grid, values=np.exp(-y * y) * np.exp(1j * y))
    assert mode_l2(gauss) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-10)


def test_mode_l2_rejects_fields_that_do_not_decay():
    const = ComplexField(grid=make_grid(0, 1, 101), values=np.ones(101))
    with pytest.raises(DomainError):
        mode_l2(const)


# -------------------------------------------------
# Fits
# -------------------------------------------------

@pytest.mark.parametrize("alpha", [0.2, 0.5, 1.2])
def test_fit_recovers_power_law(alpha):
    fit = fit_decay(synthetic(alpha))
    assert fit.exponent == pytest.approx(alpha, abs=1e-10)
    assert fit.amplitude == pytest.approx(2.0, rel=1e-10)
    assert not fit.log_factor
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_detects_log_factor():
    fit = fit_decay(synthetic(0.5, log=True))
    assert fit.log_factor
    assert fit.exponent == pytest.approx(0.5, abs=1e-10)
    assert fit.alternative_residual > fit.residual
    assert not fit_decay(synthetic(0.5, log=True), try_log=False).log_factor


def test_fit_is_scale_invariant():
    series = synthetic(0.7)
    assert fit_decay(series.scaled(1e-6)).exponent == pytest.approx(fit_decay(series).exponent, abs=1e-10)


def test_fit_needs_enough_span():
    short = DecaySeries(quantity="rho", times=np.geomspace(10, 100, 12), norms=np.ones(12))
    with pytest.raises(DomainError):
        fit_decay(short)
    few = DecaySeries(quantity="rho", times=[10, 100, 1000], norms=[1, 1, 1])
    with pytest.raises(DomainError):
        fit_decay(few)
    zero = DecaySeries(quantity="rho", times=TIMES, norms=np.zeros(12))
    with pytest.raises(DomainError):
        fit_decay(zero)


def test_series_validation():
    with pytest.raises(DomainError):
        DecaySeries(quantity="ux", times=[0.5, 2], norms=[1, 1])
    with pytest.raises(DomainError):
        DecaySeries(quantity="ux", times=[2, 1], norms=[1, 1])
    with pytest.raises(DomainError):
        DecaySeries(quantity="ux", times=[1, 2], norms=[1, -1])


# -------------------------------------------------
# Expected rates and constants
# -------------------------------------------------

def test_expected_exponents():
    p = derive_params(0.4, 1)
    assert expected_exponent(p, Quantity.UX) == pytest.approx(0.2)
    assert expected_exponent(p, "rho") == pytest.approx(0.2)
    assert expected_exponent(p, "uy") == pytest.approx(1.2)
    stable = derive_params(1.0, 1)
    assert expected_exponent(stable, "ux") == pytest.approx(0.5)


def test_bound_constants_are_flat_for_exact_rates():
    p = derive_params(1.0, 2)
    series = synthetic(0.5)
    consts = bound_constants(series, p, {1: 2.0, 2: 4.0})
    # 2 t^-1/2 t^1/2 / (m^-2 Q_1)
    assert consts == pytest.approx([4.0] * len(TIMES))
    with pytest.raises(DomainError):
        bound_constants(series, p, {2: 1.0})


def test_bound_constants_divide_out_log_factor():
    p = derive_params(0.5, 1)
    consts = bound_constants(synthetic(0.5, log=True, quantity="rho"), p, {1: 1.0})
    assert consts == pytest.approx([2.0] * len(TIMES))


def test_prefactor_ratio():
    a, b = synthetic(0.5, amplitude=3.0), synthetic(0.5, amplitude=1.5)
    assert prefactor_ratio(a, b) == pytest.approx([2.0] * len(TIMES))
    with pytest.raises(DomainError):
        prefactor_ratio(a, synthetic(0.5, quantity="rho"))


# -------------------------------------------------
# Series from the explicit solution
# -------------------------------------------------

def test_zero_data_series(make_ctx, make_quad):
    ctx = make_ctx(data=make_initial_data(omega_amplitude=0.0, rho_amplitude=0.0))
    series = decay_series(ctx, "ux", [10.0, 20.0], make_grid(-5, 5, 21), make_quad(ctx.params))
    assert series.norms == (0.0, 0.0)


def test_uy_is_m_times_psi(make_ctx, make_quad):
    ctx = make_ctx(1.0, 2)
    spec = make_quad(ctx.params)
    grid = make_grid(-20, 20, 401)
    uy = decay_series(ctx, "uy", [10.0], grid, spec)
    psi = decay_series(ctx, "psi", [10.0], grid, spec)
    assert uy.norms[0] == pytest.approx(2 * psi.norms[0], rel=1e-13)
    with pytest.raises(DomainError):
        decay_series(ctx, "uy", [0.5], grid, spec)


@pytest.mark.slow
@pytest.mark.parametrize("beta", [0.4, 1.0])
def test_decay_rates(make_ctx, make_quad, beta):
    ctx = make_ctx(beta, 1)
    spec = make_quad(ctx.params)
    grid = make_grid(-30, 30, 1201)
    for quantity in ("ux", "uy", "rho"):
        fit = fit_decay(decay_series(ctx, quantity, TIMES, grid, spec))
        assert fit.exponent == pytest.approx(expected_exponent(ctx.params, quantity), abs=0.05)
        assert not fit.log_factor


@pytest.mark.slow
def test_decay_rates_in_the_log_case(make_ctx, make_quad):
    ctx = make_ctx(0.5, 1)
    spec = make_quad(ctx.params)
    grid = make_grid(-30, 30, 1201)
    series = decay_series(ctx, "rho", TIMES, grid, spec)
    fit = fit_decay(series)
    assert fit.log_factor
    assert fit.exponent == pytest.approx(0.5, abs=0.05)
    q = {j: sobolev_q(ctx.data, j, ctx.params, grid) for j in (1, 2)}
    consts = bound_constants(series, ctx.params, q)
    assert max(consts) / min(consts) < 2.0
