import logging
import math

from stratcouette.backend.errors import StratCouetteError
from stratcouette.backend.explicit_solver import get_solver
from stratcouette.backend.settings import RunConfig
from stratcouette.backend.specfun import continuation_jump, scaled_w
from stratcouette.backend.tg_lap import SpectralPoint, jump_assembly, lap_reconstruct_t0, tg_residual
from stratcouette.tools.compare import relative_l2
from stratcouette.tools.output import (
    COMMON_KEYS,
    QUADRATURE_KEYS,
    ToolSpec,
    config_schema,
    error_result,
    finish,
    make_check,
    write_report,
)

logger = logging.getLogger(__name__)

# error reduction per decade of eps for the continuation jump
JUMP_RATE = 5.0
ASSEMBLY_TOLERANCE = 1e-6
TG_EPSILON = 0.1
TG_ORDER_RANGE = (3.5, 4.5)


def lap_check_tool():
    return ToolSpec(
        name="lap-check",
        description="Limiting-absorption checks: continuation jump convergence, Taylor-Goldstein "
                    "residual order and the t = 0 reconstruction.",
        inputSchema=config_schema(*COMMON_KEYS, *QUADRATURE_KEYS, "lap_eps", "lap_y0_extension",
                                  "lap_tolerance", "lap_y", "lap_y0", "jump_eps", "jump_etas"),
    )


def _jump_checks(config: RunConfig, results: dict) -> list[dict]:
    params = config.params()
    eps = sorted(config.jump_eps, reverse=True)
    checks = []
    for eta in config.jump_etas:
        limit = 2j * params.cos_gamma_pi * complex(scaled_w(params.gamma, params.m, eta)[0])
        errors = [abs(continuation_jump(params.gamma, eta, e, params.m) - limit) for e in eps]
        results[f"jump_eta={eta:g}"] = errors
        rates = [a / b if b > 0 else math.inf for a, b in zip(errors[:-1], errors[1:])]
        worst = min(r ** (1.0 / math.log10(e0 / e1)) for r, e0, e1 in zip(rates, eps[:-1], eps[1:])) if rates else math.inf
        checks.append(make_check(f"jump_rate_eta={eta:g}", worst >= JUMP_RATE, worst, JUMP_RATE))
    return checks


def _tg_checks(config: RunConfig, results: dict) -> list[dict]:
    ctx = config.context()
    quad = config.quadrature(ctx.params)
    pt = SpectralPoint(y0=config.lap_y0, epsilon=TG_EPSILON, sign=1)
    h = TG_EPSILON / 10
    coarse = abs(tg_residual(ctx, pt, config.lap_y, quad, h))
    fine = abs(tg_residual(ctx, pt, config.lap_y, quad, h / 2))
    ratio = coarse / fine if fine > 0 else math.inf
    results["tg_residual"] = [coarse, fine]
    lo, hi = TG_ORDER_RANGE
    checks = [make_check("tg_residual_order", lo <= ratio <= hi, ratio, hi)]

    parts = jump_assembly(ctx, config.lap_y, config.lap_y0, min(config.lap_eps), quad)
    results["jump_assembly"] = parts
    gap = abs(parts["direct"] - parts["assembled"]) / max(abs(parts["direct"]), 1e-300)
    checks.append(make_check("jump_assembly", gap <= ASSEMBLY_TOLERANCE, gap, ASSEMBLY_TOLERANCE))
    return checks


def _reconstruction_check(config: RunConfig, results: dict) -> list[dict]:
    ctx = config.context()
    grid = config.grid()
    quad = config.quadrature(ctx.params)
    recon = lap_reconstruct_t0(ctx, grid, config.lap_eps, y0_extension=config.lap_y0_extension)
    explicit = get_solver(ctx, quad).snapshot(0.0, grid).psi
    err = relative_l2(recon, explicit)
    results["reconstruction_error"] = err
    # spectral parameter truncated to the grid plus the extension
    ext = config.lap_y0_extension
    results["y0_range"] = [grid.y_min - ext, grid.y_max + ext]
    results["data_at_y0_edge"] = float(max(abs(ctx.data.omega0(grid.y_min - ext)), abs(ctx.data.omega0(grid.y_max + ext))))
    return [make_check("lap_reconstruct_t0", err <= config.lap_tolerance, err, config.lap_tolerance)]


def run_lap_check(config: RunConfig) -> dict:
    results, checks = {}, []
    try:
        checks += _jump_checks(config, results)
        checks += _tg_checks(config, results)
        checks += _reconstruction_check(config, results)
    except StratCouetteError as e:
        logger.error("lap-check failed: %s", e)
        return error_result("lap-check", e)
    files = [write_report(config, "_lap", results, checks)]
    return finish("lap-check", files, checks)
