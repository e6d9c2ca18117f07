import numpy as np
import pytest

from stratcouette.backend.core_types import ComplexField, make_grid, make_initial_data
from stratcouette.backend.errors import DomainError, StepTooLargeError
from stratcouette.backend.explicit_solver import stream_function
from stratcouette.backend.tg_lap import (
    LapLattice,
    SpectralPoint,
    generalized_density,
    generalized_stream,
    greens_function,
    jump_assembly,
    lap_reconstruct_t0,
    lattice_stream,
    tg_residual,
)
from stratcouette.tools.compare import relative_l2


# -------------------------------------------------
# Green's function
# -------------------------------------------------

def test_spectral_point_validation():
    with pytest.raises(DomainError):
        SpectralPoint(y0=0.0, epsilon=0.0)
    with pytest.raises(DomainError):
        SpectralPoint(y0=0.0, epsilon=0.1, sign=2)
    pt = SpectralPoint(y0=0.2, epsilon=0.1)
    assert pt.flipped().sign == -1
    assert pt.shift(1.2) == pytest.approx(1.0 + 0.1j)


def test_greens_function_is_symmetric(params):
    pt = SpectralPoint(y0=0.1, epsilon=0.05, sign=-1)
    assert greens_function(params, pt, 0.7, -0.4) == greens_function(params, pt, -0.4, 0.7)


@pytest.mark.parametrize("sign", [1, -1])
def test_greens_function_solves_the_equation(params, sign):
    pt = SpectralPoint(y0=0.0, epsilon=0.1, sign=sign)
    z, h = -0.6, 1e-3
    for y in (0.4, -1.5):
        g = greens_function(params, pt, np.array([y - h, y, y + h]), z)
        lap = (g[0] - 2 * g[1] + g[2]) / h ** 2 - params.m ** 2 * g[1]
        residual = lap + params.beta2 * g[1] / pt.shift(y) ** 2
        assert abs(residual) < 1e-4 * abs(lap) + 1e-6


@pytest.mark.parametrize("sign", [1, -1])
def test_greens_function_derivative_jumps_by_one(params, sign):
    pt = SpectralPoint(y0=0.0, epsilon=0.1, sign=sign)
    z, h = 0.5, 1e-6
    g = greens_function(params, pt, np.array([z - h, z, z + h]), z)
    jump = (g[2] - g[1]) / h - (g[1] - g[0]) / h
    assert jump == pytest.approx(1.0, abs=1e-3)


# -------------------------------------------------
# Generalized stream function and density
# -------------------------------------------------

def test_density_relation(make_ctx, make_quad):
    ctx = make_ctx(0.4, 1)
    quad = make_quad(ctx.params)
    pt = SpectralPoint(y0=0.2, epsilon=0.1, sign=1)
    y = np.array([-1.0, 0.5, 2.0])
    psi = generalized_stream(ctx, pt, y, quad)
    rho = generalized_density(ctx, pt, y, quad)
    assert np.allclose(rho, (ctx.data.rho0(y) + psi) / pt.shift(y), rtol=1e-12)


@pytest.mark.parametrize("beta", [0.4, 1.0])
def test_tg_residual_is_second_order(make_ctx, make_quad, beta):
    ctx = make_ctx(beta, 1)
    quad = make_quad(ctx.params)
    pt = SpectralPoint(y0=0.0, epsilon=0.1, sign=1)
    coarse = tg_residual(ctx, pt, 0.5, quad, 0.01)
    fine = tg_residual(ctx, pt, 0.5, quad, 0.005)
    assert 3.5 < abs(coarse) / abs(fine) < 4.5


def test_tg_residual_rejects_large_steps(make_ctx, make_quad):
    ctx = make_ctx()
    pt = SpectralPoint(y0=0.0, epsilon=0.1)
    with pytest.raises(StepTooLargeError):
        tg_residual(ctx, pt, 0.5, make_quad(ctx.params), 0.02)


def test_zero_data(make_ctx, make_quad):
    ctx = make_ctx(data=make_initial_data(omega_amplitude=0.0, rho_amplitude=0.0))
    pt = SpectralPoint(y0=0.0, epsilon=0.1)
    assert generalized_stream(ctx, pt, 0.3, make_quad(ctx.params)) == 0
    field = lap_reconstruct_t0(ctx, make_grid(-2, 2, 21))
    assert not np.any(field.values)


# -------------------------------------------------
# Jumps across the critical layer
# -------------------------------------------------

@pytest.mark.parametrize("beta", [0.4, 0.5, 1.0])
@pytest.mark.parametrize("y", [0.5, -0.3])
def test_jump_assembly_matches_direct_difference(make_ctx, make_quad, beta, y):
    ctx = make_ctx(beta, 1)
    out = jump_assembly(ctx, y, 0.0, 1e-2, make_quad(ctx.params))
    assert out["assembled"] == pytest.approx(out["direct"], rel=1e-6)


@pytest.mark.parametrize("y", [0.7, -0.7])
def test_jump_approaches_its_limit(make_ctx, make_quad, y):
    ctx = make_ctx(0.4, 1)
    quad = make_quad(ctx.params)
    wide = jump_assembly(ctx, y, 0.0, 1e-2, quad)
    narrow = jump_assembly(ctx, y, 0.0, 1e-3, quad)
    assert abs(narrow["direct"] - narrow["limit"]) < abs(wide["direct"] - wide["limit"])


def test_jump_assembly_needs_distinct_points(make_ctx, make_quad):
    ctx = make_ctx()
    with pytest.raises(DomainError):
        jump_assembly(ctx, 0.0, 0.0, 1e-2, make_quad(ctx.params))


# -------------------------------------------------
# Lattice and reconstruction
# -------------------------------------------------

def test_lattice_around_grid():
    lattice = LapLattice.around(make_grid(-1, 1, 21), extension=0.5)
    assert lattice.n_points == 31
    assert lattice.nodes()[0] == pytest.approx(-1.5)
    assert lattice.nodes()[-1] == pytest.approx(1.5)


def test_lattice_stream_matches_pointwise_evaluation(make_ctx, make_quad):
    ctx = make_ctx(1.0, 1)
    lattice = LapLattice(start=-5.0, spacing=0.01, n_points=1001)
    psi = lattice_stream(ctx, lattice, 0.2, 1)
    nodes = lattice.nodes()
    j, k = 500, 600  # y0 = 0, y = 1
    pt = SpectralPoint(y0=nodes[j], epsilon=0.2, sign=1)
    expected = generalized_stream(ctx, pt, nodes[k], make_quad(ctx.params))
    assert psi[j, k] == pytest.approx(expected, rel=1e-3)


def test_reconstruction_needs_two_eps(make_ctx):
    with pytest.raises(DomainError):
        lap_reconstruct_t0(make_ctx(), make_grid(-2, 2, 21), eps_sequence=(0.1,))


def test_reconstruction_extends_the_y0_range(make_ctx):
    ctx = make_ctx()
    grid = make_grid(-2, 2, 21)
    plain = lap_reconstruct_t0(ctx, grid, (0.4, 0.2))
    extended = lap_reconstruct_t0(ctx, grid, (0.4, 0.2), y0_extension=1.0)
    assert extended.values.shape == (21,)
    assert np.all(np.isfinite(extended.values))
    assert not np.allclose(extended.values, plain.values)


@pytest.mark.slow
@pytest.mark.parametrize("beta", [0.4, 1.0])
def test_reconstruction_matches_initial_stream_function(make_ctx, make_quad, beta):
    ctx = make_ctx(beta, 1)
    grid = make_grid(-8.0, 8.0, 1601)
    recon = lap_reconstruct_t0(ctx, grid)
    explicit = stream_function(ctx, 0.0, grid.nodes(), make_quad(ctx.params))
    assert relative_l2(recon, ComplexField(grid=grid, values=explicit)) < 2e-2
