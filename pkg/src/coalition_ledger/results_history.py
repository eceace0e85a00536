"""Record solve reports and summarise previously recorded runs."""

from __future__ import annotations

from typing import Any

import polars as pl
from sqlalchemy.orm import Session

from coalition_ledger.models import RunModel
from coalition_ledger.report import aggregate_payoffs, payoff_frame
from coalition_ledger.utils import logger

HISTORY_SCHEMA = {
    "roster": pl.String,
    "method": pl.String,
    "player": pl.String,
    "mean": pl.Float64,
    "std": pl.Float64,
    "min": pl.Float64,
    "max": pl.Float64,
    "count": pl.UInt32,
}


def record_run(report: dict[str, Any], session: Session) -> int:
    """
    Persists a solve report.

    Args:
        report: A payload built by ``build_report``.
        session: An open database session; the run is committed.

    Returns:
        The id of the new run.
    """
    thresholds = report.get("thresholds") or {}
    least_core = report["methods"].get("least_core", {})
    run = RunModel(
        roster=",".join(report["players"]),
        players=list(report["players"]),
        v_grand=report["v_grand"],
        t1=thresholds.get("t1"),
        t2=thresholds.get("t2"),
        evaluated_count=report.get("evaluated_count"),
        e_star=least_core.get("e_star"),
        methods=list(report["methods"]),
        report=report,
    )
    session.add(run)
    session.commit()
    logger.info("Recorded run %d for players %s", run.id, run.roster)
    return int(run.id)


def load_history(session: Session, players: list[str] | None = None) -> list[RunModel]:
    """Return recorded runs, oldest first, optionally only for one roster."""
    query = session.query(RunModel)
    if players is not None:
        query = query.filter(RunModel.roster == ",".join(players))
    return query.order_by(RunModel.date_created, RunModel.id).all()


def summarise_history(runs: list[RunModel]) -> pl.DataFrame:
    """
    Summarises payoffs across runs that share a roster.

    Args:
        runs: Recorded runs, possibly over several rosters.

    Returns:
        Per roster, method and player: mean, standard deviation, minimum,
        maximum and count of the payoff.
    """
    by_roster: dict[str, list[RunModel]] = {}
    for run in runs:
        by_roster.setdefault(str(run.roster), []).append(run)

    frames = []
    for roster, group in sorted(by_roster.items()):
        payloads = [run.report for run in group]
        labels = [str(run.id) for run in group]
        summary = aggregate_payoffs(payoff_frame(payloads, labels))
        frames.append(summary.with_columns(pl.lit(roster).alias("roster")))
    if not frames:
        return pl.DataFrame(schema=HISTORY_SCHEMA)
    return pl.concat(frames).select(list(HISTORY_SCHEMA)).cast(HISTORY_SCHEMA)
