import logging

from stratcouette.backend.core_types import ComplexField
from stratcouette.backend.errors import StratCouetteError
from stratcouette.backend.explicit_solver import SolutionSnapshot
from stratcouette.backend.reference_solver import EvolState, integrate, solve_fields
from stratcouette.backend.settings import RunConfig
from stratcouette.tools.output import COMMON_KEYS, ToolSpec, config_schema, error_result, finish, write_csv
from stratcouette.tools.solve_explicit import snapshot_columns

logger = logging.getLogger(__name__)


def solve_reference_tool():
    return ToolSpec(
        name="solve-reference",
        description="Time-step the linearized system (finite differences + RK4) and write snapshots "
                    "in the solve-explicit layout.",
        inputSchema=config_schema(*COMMON_KEYS, "dt", "times", "t_min", "t_max", "n_times"),
    )


def reference_snapshots(config: RunConfig) -> list[SolutionSnapshot]:
    params = config.params()
    grid = config.grid()
    times = config.time_list()
    state0 = EvolState.initial(config.initial_data(), grid)
    states = integrate(state0, params, max(times), config.dt, output_times=times)

    snapshots = []
    for state in states:
        fields = solve_fields(state, params)
        snapshots.append(SolutionSnapshot(
            time=state.time,
            quadrature_meta={"dt": config.dt, "method": "rk4-fd2"},
            **{name: ComplexField(grid=grid, values=values, time=state.time) for name, values in fields.items()},
        ))
    return snapshots


def run_solve_reference(config: RunConfig) -> dict:
    try:
        snapshots = reference_snapshots(config)
    except StratCouetteError as e:
        logger.error("solve-reference failed: %s", e)
        return error_result("solve-reference", e)

    files = []
    for snap in snapshots:
        meta = {"time": snap.time, **snap.quadrature_meta}
        path = config.output_path(f"_reference_t{snap.time:.6g}.csv")
        files.append(write_csv(path, config, snapshot_columns(snap), meta))
    return finish("solve-reference", files, [], times=[s.time for s in snapshots])
