import logging

import numpy as np

from stratcouette.backend.core_types import ComplexField
from stratcouette.backend.damping import mode_l2
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
    write_report,
)
from stratcouette.tools.solve_explicit import explicit_snapshots
from stratcouette.tools.solve_reference import reference_snapshots

logger = logging.getLogger(__name__)

COMPARED_FIELDS = ("psi", "rho", "ux", "uy")


def compare_tool():
    return ToolSpec(
        name="compare",
        description="Run the explicit and reference solvers and report per-time relative L2 differences.",
        inputSchema=config_schema(*COMMON_KEYS, *QUADRATURE_KEYS, "dt", "compare_tolerance", "times"),
    )


def relative_l2(a: ComplexField, b: ComplexField) -> float:
    """||a - b|| / ||b|| on the shared grid."""
    diff = ComplexField(grid=b.grid, values=np.asarray(a.values) - np.asarray(b.values), time=b.time)
    scale = mode_l2(b, edge_tol=None)
    return mode_l2(diff, edge_tol=None) / scale if scale > 0 else mode_l2(diff, edge_tol=None)


def run_compare(config: RunConfig) -> dict:
    try:
        explicit = explicit_snapshots(config)
        reference = reference_snapshots(config)
    except StratCouetteError as e:
        logger.error("compare failed: %s", e)
        return error_result("compare", e)

    results, checks = [], []
    for ex, ref in zip(explicit, reference):
        row = {"time": ex.time}
        for name in COMPARED_FIELDS:
            err = relative_l2(getattr(ex, name), getattr(ref, name))
            row[name] = err
            checks.append(make_check(f"{name}@t={ex.time:g}", err <= config.compare_tolerance, err, config.compare_tolerance))
        logger.info("compare t=%g: %s", ex.time, {k: f"{v:.3e}" for k, v in row.items() if k != "time"})
        results.append(row)

    files = [write_report(config, "_compare", results, checks)]
    return finish("compare", files, checks)
