import logging

from stratcouette.backend.errors import StratCouetteError
from stratcouette.backend.explicit_solver import SolutionSnapshot, get_solver
from stratcouette.backend.settings import RunConfig
from stratcouette.tools.output import COMMON_KEYS, QUADRATURE_KEYS, ToolSpec, config_schema, error_result, finish, write_csv

logger = logging.getLogger(__name__)


def solve_explicit_tool():
    return ToolSpec(
        name="solve-explicit",
        description="Evaluate the closed-form psi, rho, omega, u^x, u^y of one mode at the requested times.",
        inputSchema=config_schema(*COMMON_KEYS, *QUADRATURE_KEYS, "times", "t_min", "t_max", "n_times"),
    )


def snapshot_columns(snap: SolutionSnapshot) -> dict:
    """Shared column layout of explicit and reference snapshot files."""
    return {"y": snap.grid.nodes(), **snap.as_columns()}


def explicit_snapshots(config: RunConfig) -> list[SolutionSnapshot]:
    ctx = config.context()
    solver = get_solver(ctx, config.quadrature(ctx.params))
    grid = config.grid()
    return [solver.snapshot(t, grid) for t in config.time_list()]


def run_solve_explicit(config: RunConfig) -> dict:
    try:
        snapshots = explicit_snapshots(config)
    except StratCouetteError as e:
        logger.error("solve-explicit failed: %s", e)
        return error_result("solve-explicit", e)

    files = []
    for snap in snapshots:
        meta = {"time": snap.time, **snap.quadrature_meta}
        path = config.output_path(f"_explicit_t{snap.time:.6g}.csv")
        files.append(write_csv(path, config, snapshot_columns(snap), meta))
    return finish("solve-explicit", files, [], times=[s.time for s in snapshots])
