import argparse
import json
import logging
import os
import sys

# add project root to python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from stratcouette.backend.errors import ConfigError, StratCouetteError
from stratcouette.backend.settings import RunConfig, load_config
from stratcouette.tools.compare import compare_tool, run_compare
from stratcouette.tools.decay_study import decay_study_tool, run_decay_study
from stratcouette.tools.lap_check import lap_check_tool, run_lap_check
from stratcouette.tools.output import ToolSpec, error_result
from stratcouette.tools.solve_explicit import run_solve_explicit, solve_explicit_tool
from stratcouette.tools.solve_reference import run_solve_reference, solve_reference_tool
from stratcouette.tools.specfun_table import run_specfun_table, specfun_table_tool

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2
EXIT_CONFIG = 3


def list_tools() -> list[ToolSpec]:
    """
    List all subcommands with their input schemas.
    """
    return [
        specfun_table_tool(),
        solve_explicit_tool(),
        solve_reference_tool(),
        compare_tool(),
        decay_study_tool(),
        lap_check_tool(),
    ]


def call_tool(name: str, config: RunConfig) -> dict:
    """
    Execute the requested subcommand.
    """
    try:
        if name == "specfun-table":
            result = run_specfun_table(config)

        elif name == "solve-explicit":
            result = run_solve_explicit(config)

        elif name == "solve-reference":
            result = run_solve_reference(config)

        elif name == "compare":
            result = run_compare(config)

        elif name == "decay-study":
            result = run_decay_study(config)

        elif name == "lap-check":
            result = run_lap_check(config)

        else:
            result = {
                "status": "error",
                "message": f"Unknown tool: {name}"
            }

        return result

    except StratCouetteError as e:
        logger.exception("%s failed", name)
        return error_result(name, e)


def exit_code(result: dict) -> int:
    status = result.get("status")
    if status == "ok":
        return EXIT_OK
    if status == "fail":
        return EXIT_CHECK_FAILED
    return int(result.get("exit_code", EXIT_ERROR))


def build_parser() -> argparse.ArgumentParser:
    names = [tool.name for tool in list_tools()]
    parser = argparse.ArgumentParser(
        prog="python -m stratcouette.main",
        description="Explicit solutions and inviscid damping of stratified Couette flow.",
    )
    parser.add_argument("command", choices=["list", *names])
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("overrides", nargs="*", metavar="key=value", help="configuration overrides")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list":
        print(json.dumps([tool.model_dump() for tool in list_tools()], indent=2))
        return EXIT_OK

    try:
        config = load_config(args.config, args.overrides)
    except ConfigError as e:
        logging.basicConfig(level=logging.INFO)
        logger.error("configuration error: %s", e.message)
        print(json.dumps(error_result(args.command, e), indent=2))
        return EXIT_CONFIG

    logging.basicConfig(
        level=getattr(logging, config.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    result = call_tool(args.command, config)
    print(json.dumps(result, indent=2))
    return exit_code(result)


if __name__ == "__main__":
    sys.exit(main())
