import logging

import numpy as np

from stratcouette.backend.core_types import sobolev_q
from stratcouette.backend.damping import bound_constants, decay_series, expected_exponent, fit_decay
from stratcouette.backend.errors import StratCouetteError
from stratcouette.backend.settings import RunConfig
from stratcouette.tools.output import (
    COMMON_KEYS,
    QUADRATURE_KEYS,
    ToolSpec,
    config_schema,
    error_result,
    finish,
    make_check,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)


def decay_study_tool():
    return ToolSpec(
        name="decay-study",
        description="Norms of u^x, u^y, rho over log-spaced times and their fitted decay exponents.",
        inputSchema=config_schema(*COMMON_KEYS, *QUADRATURE_KEYS, "t_min", "t_max", "n_times", "times",
                                  "quantities", "try_log", "exponent_tolerance"),
    )


def run_decay_study(config: RunConfig) -> dict:
    ctx = config.context()
    params = ctx.params
    grid = config.grid()
    times = config.time_list()
    try:
        spec = config.quadrature(params)
        series = {q: decay_series(ctx, q, times, grid, spec) for q in config.quantities}
        fits = {q: fit_decay(s, config.try_log) for q, s in series.items()}
        q_values = {j: sobolev_q(ctx.data, j, params, grid) for j in (1, 2)}
    except StratCouetteError as e:
        logger.error("decay-study failed: %s", e)
        return error_result("decay-study", e)

    results, checks = {}, []
    for q, fit in fits.items():
        expected = expected_exponent(params, q)
        results[q] = {
            **fit.model_dump(),
            "expected_exponent": expected,
            "bound_constants": bound_constants(series[q], params, q_values),
        }
        tol = config.exponent_tolerance
        checks.append(make_check(f"{q}_exponent", abs(fit.exponent - expected) <= tol, fit.exponent, tol))
        if config.try_log:
            checks.append(make_check(f"{q}_log_factor", fit.log_factor == params.is_log_case,
                                     float(fit.log_factor), float(params.is_log_case)))

    columns = {"t": np.asarray(times)}
    columns.update({q: np.asarray(s.norms) for q, s in series.items()})
    files = [
        write_csv(config.output_path("_decay.csv"), config, columns),
        write_json(config.output_path("_decay_fit.json"), config, results, checks),
    ]
    return finish("decay-study", files, checks)
