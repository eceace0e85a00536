"""
Command-line interface: validate games, run pruned evaluations, solve
allocations, sweep thresholds and compare or summarise runs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

from coalition_ledger.exceptions import CoalitionLedgerError, InputError, OracleError
from coalition_ledger.game import load_game
from coalition_ledger.models import get_session_factory
from coalition_ledger.report import (
    compare_reports,
    dumps_report,
    load_report,
    render_comparison_table,
    render_frame,
    render_report_table,
)
from coalition_ledger.results_history import load_history, record_run, summarise_history
from coalition_ledger.runner import (
    RunConfig,
    create_oracle,
    run_prune,
    run_solve,
    validate_summary,
)
from coalition_ledger.sweep import sweep_thresholds
from coalition_ledger.utils import PRUNING_PRESETS, logger


def _name_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in _name_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


class LedgerArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as ``InputError`` so they share the JSON error path."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


def _add_source_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--game", help="game file (JSON value table)")
    parser.add_argument("--oracle-cmd", help="external command that serves v(S)")
    parser.add_argument("--cache", help="cache file for the oracle command")
    parser.add_argument(
        "--players", type=_name_list, help="comma-separated player roster"
    )
    parser.add_argument("--synthetic", help="synthetic game, e.g. coverage:n=10;seed=7")
    parser.add_argument(
        "--weights", type=_float_list, help="comma-separated proportional weights"
    )


def _add_threshold_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--t1", type=float, help="diminishing-returns threshold")
    parser.add_argument("--t2", type=float, help="performance-ceiling threshold")
    parser.add_argument(
        "--preset",
        choices=list(PRUNING_PRESETS),
        help="threshold preset; explicit --t1/--t2 override it",
    )


def _add_output_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["json", "table"], default="json")
    parser.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per command."""
    parser = LedgerArgumentParser(
        prog="coalition-ledger",
        description="Fair payoff allocation for collaborative model training.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="diagnostics written to stderr",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="prune, then solve allocations")
    _add_source_arguments(solve)
    _add_threshold_arguments(solve)
    _add_output_arguments(solve)
    solve.add_argument(
        "--methods",
        type=_name_list,
        default=["least_core"],
        help="comma-separated: least_core, shapley, leave_one_out, proportional",
    )
    solve.add_argument(
        "--full", action="store_true", help="the table is complete; skip pruning"
    )
    solve.add_argument(
        "--record", action="store_true", help="store the report in the run history"
    )

    prune = commands.add_parser("prune", help="run the pruned enumeration only")
    _add_source_arguments(prune)
    _add_threshold_arguments(prune)
    _add_output_arguments(prune)

    compare = commands.add_parser("compare", help="compare reports or games")
    compare.add_argument("inputs", nargs="+", help="report or game files")
    _add_threshold_arguments(compare)
    _add_output_arguments(compare)
    compare.add_argument("--methods", type=_name_list, default=["least_core"])
    compare.add_argument("--full", action="store_true")

    validate = commands.add_parser("validate", help="check a game file")
    validate.add_argument("--game", required=True)
    validate.add_argument("--require-complete", action="store_true")

    sweep = commands.add_parser("sweep", help="sweep pruning thresholds")
    _add_source_arguments(sweep)
    _add_output_arguments(sweep)
    sweep.add_argument("--grid", type=_float_list, help="values for both thresholds")
    sweep.add_argument("--t1-grid", type=_float_list)
    sweep.add_argument("--t2-grid", type=_float_list)

    history = commands.add_parser("history", help="summarise recorded runs")
    history.add_argument("--players", type=_name_list)
    _add_output_arguments(history)
    return parser


def _run_config(args: argparse.Namespace, **overrides: Any) -> RunConfig:
    options: dict[str, Any] = {
        "game_path": getattr(args, "game", None),
        "oracle_cmd": getattr(args, "oracle_cmd", None),
        "cache_path": getattr(args, "cache", None),
        "players": getattr(args, "players", None),
        "synthetic": getattr(args, "synthetic", None),
        "t1": getattr(args, "t1", None),
        "t2": getattr(args, "t2", None),
        "preset": getattr(args, "preset", None),
        "weights": getattr(args, "weights", None),
    }
    if hasattr(args, "methods"):
        options["methods"] = args.methods
    if hasattr(args, "full"):
        options["full"] = args.full
    options.update(overrides)
    return RunConfig(**options)


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"Cannot write output to {out}: {e}") from e


def cmd_solve(args: argparse.Namespace) -> int:
    report = run_solve(_run_config(args))
    if args.record:
        session = get_session_factory()()
        try:
            run_id = record_run(report, session)
        finally:
            session.close()
        logger.info("Stored report as run %d", run_id)
    if args.format == "json":
        text = dumps_report(report)
    else:
        text = render_report_table(report)
    _write(text, args.out)
    return 0


def cmd_prune(args: argparse.Namespace) -> int:
    log = run_prune(_run_config(args))
    if args.format == "json":
        text = log.to_json_lines()
    else:
        text = render_frame(log.to_frame()) + "\n" + json.dumps(log.summary()) + "\n"
    _write(text, args.out)
    return 0


def _comparable(path: str, args: argparse.Namespace) -> dict[str, Any]:
    """A report as-is, or a game file solved with the command's settings."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        data = None
    if isinstance(data, dict) and "methods" in data:
        return load_report(path)
    return run_solve(
        _run_config(
            args, game_path=path, oracle_cmd=None, synthetic=None, weights=None
        )
    )


def cmd_compare(args: argparse.Namespace) -> int:
    payloads = [_comparable(path, args) for path in args.inputs]
    stems = [Path(path).stem for path in args.inputs]
    labels = stems if len(set(stems)) == len(stems) else [
        str(i + 1) for i in range(len(stems))
    ]
    comparison = compare_reports(payloads, labels)
    if args.format == "json":
        text = json.dumps(comparison, indent=2, ensure_ascii=False) + "\n"
    else:
        text = render_comparison_table(comparison)
    _write(text, args.out)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    summary = validate_summary(load_game(args.game))
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    if args.require_complete and not summary["complete"]:
        return InputError.exit_code
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    t1_grid = args.t1_grid if args.t1_grid is not None else args.grid
    t2_grid = args.t2_grid if args.t2_grid is not None else args.grid
    if t1_grid is None or t2_grid is None:
        raise InputError("Give --grid or both --t1-grid and --t2-grid")
    source = create_oracle(_run_config(args))
    frame = sweep_thresholds(source.oracle, source.oracle.n, t1_grid, t2_grid)
    if source.cache is not None:
        source.cache.flush()
    if args.format == "json":
        text = json.dumps(frame.to_dicts(), indent=2) + "\n"
    else:
        text = render_frame(frame) + "\n"
    _write(text, args.out)
    return 0


def cmd_history(args: argparse.Namespace) -> int:
    session = get_session_factory()()
    try:
        frame = summarise_history(load_history(session, args.players))
    finally:
        session.close()
    if args.format == "json":
        text = json.dumps(frame.to_dicts(), indent=2) + "\n"
    else:
        text = render_frame(frame) + "\n"
    _write(text, args.out)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "prune": cmd_prune,
    "compare": cmd_compare,
    "validate": cmd_validate,
    "sweep": cmd_sweep,
    "history": cmd_history,
}


def error_payload(error: CoalitionLedgerError) -> dict[str, Any]:
    """The machine-readable form of an error, as printed on stderr."""
    payload: dict[str, Any] = {
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": error.exit_code,
    }
    if isinstance(error, OracleError):
        if error.coalition:
            payload["coalition"] = error.coalition
        if error.partial_log is not None:
            payload["evaluated_before_failure"] = error.partial_log.evaluated_count
    return payload


def main(argv: Sequence[str] | None = None) -> int:
    """
    Runs one command.

    Args:
        argv: Arguments without the program name; defaults to ``sys.argv``.

    Returns:
        The process exit code: 0 on success, 2 for invalid input, 3 for an
        oracle failure and 4 for a solver failure.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except InputError as e:
        sys.stderr.write(json.dumps(error_payload(e)) + "\n")
        return e.exit_code
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s [%(name)s] %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except CoalitionLedgerError as e:
        sys.stderr.write(json.dumps(error_payload(e)) + "\n")
        return e.exit_code
