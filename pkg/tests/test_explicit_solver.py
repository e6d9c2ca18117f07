import numpy as np
import pytest

from stratcouette.backend.core_types import ComplexField, make_grid, make_initial_data
from stratcouette.backend.errors import DomainError
from stratcouette.backend.explicit_solver import (
    ExplicitSolver,
    conjugate_mode,
    density,
    dy_stream_function,
    snapshot,
    stream_function,
    vorticity,
)
from stratcouette.backend.reference_solver import EvolState, integrate, solve_fields
from stratcouette.tools.compare import relative_l2


def rel_err(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(b)))


# -------------------------------------------------
# Initial time
# -------------------------------------------------

@pytest.mark.parametrize("beta,m", [(0.4, 1), (0.5, 1), (1.0, 1), (0.4, 2), (1.0, 2)])
def test_initial_data_is_reproduced(make_ctx, make_quad, beta, m):
    ctx = make_ctx(beta, m)
    spec = make_quad(ctx.params)
    y = np.linspace(-4.0, 4.0, 81)
    assert rel_err(density(ctx, 0.0, y, spec), ctx.data.rho0(y)) < 1e-4
    assert rel_err(vorticity(ctx, 0.0, y, spec), ctx.data.omega0(y)) < 1e-4


def test_dy_stream_function_matches_finite_difference(make_ctx, make_quad):
    ctx = make_ctx(0.4, 1)
    spec = make_quad(ctx.params)
    y, h, t = np.array([-0.7, 0.1, 1.3]), 1e-4, 2.0
    fd = (stream_function(ctx, t, y + h, spec) - stream_function(ctx, t, y - h, spec)) / (2 * h)
    assert np.allclose(dy_stream_function(ctx, t, y, spec), fd, rtol=1e-6, atol=1e-9)


def test_scalar_and_vector_calls_agree(make_ctx, make_quad):
    ctx = make_ctx(1.0, 1)
    spec = make_quad(ctx.params)
    y = np.array([0.0, 0.5])
    vec = stream_function(ctx, 3.0, y, spec)
    assert isinstance(stream_function(ctx, 3.0, 0.5, spec), complex)
    assert stream_function(ctx, 3.0, 0.5, spec) == pytest.approx(vec[1], rel=1e-12)


# -------------------------------------------------
# Residuals
# -------------------------------------------------

@pytest.mark.parametrize("beta", [0.4, 1.0])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 5.0])
def test_pde_residual_is_second_order(make_ctx, make_quad, beta, t):
    ctx = make_ctx(beta, 1)
    solver = ExplicitSolver(ctx, make_quad(ctx.params))
    y = np.array([-2.0, 0.0, 1.0])
    coarse = solver.pde_residual(t, y, 0.02)
    fine = solver.pde_residual(t, y, 0.01)
    for rc, rf in zip(coarse, fine):
        ratio = np.abs(rc) / np.abs(rf)
        assert np.all((ratio >= 3.5) & (ratio <= 4.5)), ratio


def test_moving_frame_residual_is_small(make_ctx, make_quad):
    ctx = make_ctx(0.4, 1)
    solver = ExplicitSolver(ctx, make_quad(ctx.params))
    r1, r2 = solver.moving_frame_residual(2.0, np.array([0.0, 0.8]), 1e-3)
    assert np.max(np.abs(r1)) < 1e-3
    assert np.max(np.abs(r2)) < 1e-3


def test_residual_step_validation(make_ctx, make_quad):
    ctx = make_ctx()
    solver = ExplicitSolver(ctx, make_quad(ctx.params))
    with pytest.raises(DomainError):
        solver.pde_residual(0.005, 0.0, 0.01)
    with pytest.raises(DomainError):
        solver.moving_frame(-1.0, 0.0)


# -------------------------------------------------
# Structure
# -------------------------------------------------

def test_linearity_in_the_data(make_ctx, make_quad):
    ctx = make_ctx(1.0, 1)
    spec = make_quad(ctx.params)
    y = np.linspace(-2, 2, 9)
    base = stream_function(ctx, 5.0, y, spec)
    scaled = stream_function(ctx.scaled(3.0), 5.0, y, spec)
    assert np.allclose(scaled, 3.0 * base, rtol=1e-12, atol=1e-15)


def test_zero_data_gives_zero_fields(make_ctx, make_quad):
    ctx = make_ctx(data=make_initial_data(omega_amplitude=0.0, rho_amplitude=0.0))
    snap = snapshot(ctx, 4.0, make_grid(-5, 5, 21), make_quad(ctx.params))
    for values in snap.as_columns().values():
        assert not np.any(values)


def test_snapshot_fields_and_conjugate(make_ctx, make_quad):
    ctx = make_ctx(0.4, 2)
    grid = make_grid(-6, 6, 121)
    snap = snapshot(ctx, 2.0, grid, make_quad(ctx.params))
    assert np.allclose(snap.uy.values, 2j * snap.psi.values)
    assert snap.quadrature_meta["split_delta"] == pytest.approx(1 / 16)
    conj = conjugate_mode(snap)
    assert np.array_equal(conj.rho.values, np.conj(snap.rho.values))
    assert conj.quadrature_meta["conjugated"] is True
    assert conjugate_mode(conj).quadrature_meta["conjugated"] is False


def test_snapshot_records_achieved_tolerance(make_ctx, make_quad):
    ctx = make_ctx(0.4, 1)
    spec = make_quad(ctx.params)
    snap = snapshot(ctx, 1.0, make_grid(-4, 4, 41), spec)
    achieved = snap.quadrature_meta["achieved_tolerance"]
    assert 0.0 <= achieved < 1e-4

    zero = make_ctx(data=make_initial_data(omega_amplitude=0.0, rho_amplitude=0.0))
    assert snapshot(zero, 1.0, make_grid(-4, 4, 41), spec).quadrature_meta["achieved_tolerance"] == 0.0


# -------------------------------------------------
# Against the time-stepped reference
# -------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("t", [1.0, 3.0])
@pytest.mark.parametrize("beta,m", [(0.4, 1), (0.5, 1), (1.0, 1), (0.4, 2)])
def test_agrees_with_reference_solver(make_ctx, make_quad, beta, m, t):
    ctx = make_ctx(beta, m)
    grid = make_grid(-12.0, 12.0, 2401)
    explicit = snapshot(ctx, t, grid, make_quad(ctx.params))
    state = integrate(EvolState.initial(ctx.data, grid), ctx.params, t, 0.01)[-1]
    fields = solve_fields(state, ctx.params)
    for name in ("psi", "rho", "ux", "uy"):
        reference = ComplexField(grid=grid, values=fields[name], time=t)
        err = relative_l2(getattr(explicit, name), reference)
        assert err < 1e-3, name
