import argparse
import dataclasses
import logging
import os
import sys
from typing import Any, List, Optional, Tuple

from . import parser as io_parser
from .config import FORMATS, RunConfig, get_config
from .errors import MinkpolyError
from .handlers import HANDLERS
from .logger import RunLogger, setup_logging
from .ui import display_error, display_history, display_home_page

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minkpoly",
        description="""
        Numerics for hyperpolygon spaces, the circle-action involution and
        closed polygons in Minkowski 3-space.
        """
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--input", type=str, help="JSON file with weights, a hyperpolygon or a polygon.")
    shared.add_argument("--output", type=str, help="Write the report here instead of stdout.")
    shared.add_argument("--tol", type=float, help="Relative proportionality tolerance for straight sets.")
    shared.add_argument("--kn-tol", type=float, help="Kempf-Ness residual tolerance.")
    shared.add_argument("--seed", type=int, help="Random seed.")
    shared.add_argument("--max-iters", type=int, help="Kempf-Ness iteration cap.")
    shared.add_argument("--format", type=str, choices=FORMATS, help="Report format.")

    subparsers.add_parser("census", parents=[shared], help="Fixed components of the involution.")
    subparsers.add_parser("stability", parents=[shared], help="Check alpha-stability.")
    subparsers.add_parser("normalize", parents=[shared], help="Kempf-Ness normalization.")
    subparsers.add_parser("classify", parents=[shared], help="Classify an involution fixed point.")

    convert_parser = subparsers.add_parser("convert", parents=[shared], help="Convert between pictures.")
    convert_parser.add_argument("--to", type=str, choices=("higgs", "minkowski", "hyper"), required=True)
    convert_parser.add_argument("--subset", type=int, nargs="+",
                                help="(Optional) 1-based labels of S; classified when omitted.")

    bend_parser = subparsers.add_parser("bend", parents=[shared], help="Bending flow of a Minkowski polygon.")
    bend_parser.add_argument("--sweep", type=int, help="Number of equally spaced bending angles.")

    witness_parser = subparsers.add_parser("witness", parents=[shared], help="Non-compactness witness.")
    witness_parser.add_argument("--k1", type=int, required=True, help="Number of future sides.")
    witness_parser.add_argument("--m-max", type=int, help="Last doubling step (default: first with ell > 1e3).")

    subparsers.add_parser("sample", parents=[shared], help="Sample the complex level set.")
    subparsers.add_parser("selftest", parents=[shared], help="Run the invariant suite.")

    history_parser = subparsers.add_parser("history", help="Show recorded runs.")
    history_parser.add_argument("--limit", type=int, default=10, help="Number of runs to show.")
    return parser


def _emit(text: str, path: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w") as f:
            f.write(text)
        logger.info(f"Report written to {path}")
    else:
        sys.stdout.write(text)


def run(run_config: RunConfig) -> Tuple[int, Any]:
    """Execute one command; errors become their exit code and JSON payload."""
    try:
        run_config.validate()
        handler = HANDLERS[run_config.command]
        exit_code, report = handler(run_config)
    except MinkpolyError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        report = e.to_payload()
        display_error(report)
        exit_code = e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error in '{run_config.command}': {str(e)}")
        report = {"success": False, "error": type(e).__name__, "message": str(e)}
        display_error(report)
        exit_code = 1
    return exit_code, report


def run_cli(argv: Optional[List[str]] = None) -> int:
    """The command-line entry point; returns the process exit code."""
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        display_home_page()
        return 0

    args = build_parser().parse_args(argv)
    config = get_config()
    setup_logging(config)

    if args.command == "history":
        display_history(RunLogger(config.log_dir).get_run_history(args.limit))
        return 0

    run_config = RunConfig.from_args(args, config)
    exit_code, report = run(run_config)
    text = report if isinstance(report, str) else io_parser.dumps(report)
    _emit(text, run_config.output_path)

    RunLogger(config.log_dir).log_run(
        run_config.command,
        io_parser.to_jsonable(dataclasses.asdict(run_config)),
        exit_code,
        report if isinstance(report, str) else io_parser.to_jsonable(report),
    )
    return exit_code


def main():
    sys.exit(run_cli())
