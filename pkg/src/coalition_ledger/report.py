"""
Builds, renders and compares allocation reports.

Reports are plain JSON-compatible dictionaries so they can be written to disk,
stored in the run history and read back by ``compare``. Numbers keep full
precision; tables render them at ``TABLE_DECIMALS`` places.
"""

from __future__ import annotations

import datetime
import itertools
import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import polars as pl

from coalition_ledger.allocator import (
    AllocationReport,
    LeastCoreResult,
    compare,
)
from coalition_ledger.exceptions import InputError, MismatchedGames, ReportFormatError
from coalition_ledger.game import Allocation
from coalition_ledger.utils import METHOD_ORDER, TABLE_DECIMALS

REPORT_KEYS = ("players", "v_grand", "methods")


def utc_timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _phi_dict(names: Sequence[str], allocation: Allocation) -> dict[str, float]:
    return dict(zip(names, allocation.phi))


def _comparison_rows(report: AllocationReport) -> list[dict[str, Any]]:
    return [
        {
            "left": pair.left,
            "right": pair.right,
            "cosine": pair.cosine,
            "max_abs_diff": pair.max_abs_diff,
        }
        for pair in report.comparisons
    ]


def build_report(
    names: Sequence[str],
    v_grand: float,
    report: AllocationReport,
    least_core: LeastCoreResult | None = None,
    thresholds: tuple[float, float] | None = None,
    generated_at: str | None = None,
) -> dict[str, Any]:
    """
    Assembles the report payload for one solve.

    Args:
        names: The player roster.
        v_grand: The distributed value v(D).
        report: The compared allocations.
        least_core: The least-core result, when that method ran.
        thresholds: (t1, t2) used for pruning, or None for a full table.
        generated_at: ISO timestamp; defaults to now in UTC.

    Returns:
        A JSON-compatible dictionary.
    """
    roster = list(names)
    methods: dict[str, dict[str, Any]] = {}
    for allocation in report.allocations:
        entry: dict[str, Any] = {"phi": _phi_dict(roster, allocation)}
        if allocation.method == "least_core" and least_core is not None:
            entry["e_star"] = least_core.e_star
        methods[allocation.method] = entry

    payload: dict[str, Any] = {
        "players": roster,
        "v_grand": v_grand,
        "thresholds": None
        if thresholds is None
        else {"t1": thresholds[0], "t2": thresholds[1]},
        "evaluated_count": report.evaluated_count,
        "methods": methods,
    }
    if least_core is not None:
        payload["deficits"] = {
            c.key(roster): gap for c, gap in sorted(least_core.deficits.items())
        }
        payload["binding"] = [c.key(roster) for c in least_core.binding]
        payload["near_binding"] = [c.key(roster) for c in least_core.near_binding]
        payload["zero_payoff"] = [roster[i] for i in least_core.zero_payoff]
    payload["comparison"] = _comparison_rows(report)
    payload["generated_at"] = generated_at or utc_timestamp()
    return payload


def dumps_report(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def load_report(path: str | Path) -> dict[str, Any]:
    """
    Reads a report written by ``solve``.

    Args:
        path: Path to the report JSON.

    Returns:
        The report payload.
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ReportFormatError(f"Cannot read report {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ReportFormatError(f"Report {path} is not valid JSON: {e}") from e
    if not isinstance(payload, dict) or any(k not in payload for k in REPORT_KEYS):
        raise ReportFormatError(
            f"Report {path} must be an object with keys {list(REPORT_KEYS)}"
        )
    return payload


def allocations_from_report(
    payload: dict[str, Any], label: str | None = None
) -> list[Allocation]:
    """Rebuild the allocations stored in a report, optionally tagging them."""
    names = payload["players"]
    allocations = []
    for method, entry in payload["methods"].items():
        phi = entry.get("phi", {})
        if set(phi) != set(names):
            raise ReportFormatError(f"Payoffs of {method} do not cover the roster")
        tag = method if label is None else f"{method}@{label}"
        allocations.append(Allocation(tuple(phi[name] for name in names), tag))
    return allocations


def payoff_frame(
    payloads: Sequence[dict[str, Any]], labels: Sequence[str]
) -> pl.DataFrame:
    """
    Long table of every payoff in a set of reports.

    Returns:
        Columns ``run``, ``method``, ``player``, ``player_index`` and
        ``payoff``.
    """
    rows = [
        {
            "run": label,
            "method": method,
            "player": name,
            "player_index": index,
            "payoff": float(entry["phi"][name]),
        }
        for payload, label in zip(payloads, labels)
        for method, entry in payload["methods"].items()
        for index, name in enumerate(payload["players"])
    ]
    schema = {
        "run": pl.String,
        "method": pl.String,
        "player": pl.String,
        "player_index": pl.Int64,
        "payoff": pl.Float64,
    }
    return pl.DataFrame(rows, schema=schema)


def aggregate_payoffs(frame: pl.DataFrame) -> pl.DataFrame:
    """
    Summarises payoffs per method and player across runs.

    Args:
        frame: Output of ``payoff_frame``.

    Returns:
        Mean, standard deviation, minimum, maximum and run count of each
        player's payoff under each method.
    """
    method_rank = pl.col("method").replace_strict(
        {m: i for i, m in enumerate(METHOD_ORDER)},
        default=len(METHOD_ORDER),
        return_dtype=pl.Int64,
    )
    return (
        frame.group_by(["method", "player", "player_index"])
        .agg(
            pl.col("payoff").mean().alias("mean"),
            pl.col("payoff").std().alias("std"),
            pl.col("payoff").min().alias("min"),
            pl.col("payoff").max().alias("max"),
            pl.col("payoff").count().alias("count"),
        )
        .with_columns(method_rank.alias("method_rank"))
        .sort(["method_rank", "method", "player_index"])
        .drop(["method_rank", "player_index"])
    )


def compare_reports(
    payloads: Sequence[dict[str, Any]], labels: Sequence[str]
) -> dict[str, Any]:
    """
    Compares reports over the same roster.

    Every allocation is tagged ``method@label``; all pairs are compared, the
    least-core optimum gap is reported for every pair of inputs that solved
    it, and payoffs are aggregated per method and player.

    Args:
        payloads: At least two report payloads.
        labels: One label per payload.

    Returns:
        The comparison payload.
    """
    if len(payloads) < 2:
        raise InputError("Comparison needs at least two inputs")
    roster = list(payloads[0]["players"])
    for payload, label in zip(payloads[1:], labels[1:]):
        if list(payload["players"]) != roster:
            raise MismatchedGames(
                f"Input {label} has players {payload['players']}, expected {roster}"
            )

    allocations = [
        allocation
        for payload, label in zip(payloads, labels)
        for allocation in allocations_from_report(payload, label)
    ]
    report = compare(allocations)
    e_stars = {
        label: payload["methods"].get("least_core", {}).get("e_star")
        for payload, label in zip(payloads, labels)
    }
    deltas = [
        {"left": left, "right": right, "delta": e_stars[left] - e_stars[right]}
        for left, right in itertools.combinations(labels, 2)
        if e_stars[left] is not None and e_stars[right] is not None
    ]
    aggregate = aggregate_payoffs(payoff_frame(payloads, labels))
    return {
        "inputs": list(labels),
        "players": roster,
        "methods": {
            a.method: {"phi": _phi_dict(roster, a)} for a in report.allocations
        },
        "e_star": e_stars,
        "delta_e_star": deltas,
        "comparison": _comparison_rows(report),
        "aggregate": aggregate.to_dicts(),
    }


def render_frame(frame: pl.DataFrame) -> str:
    """Render a DataFrame as a fixed-width table at TABLE_DECIMALS places."""
    with pl.Config(
        float_precision=TABLE_DECIMALS,
        tbl_rows=-1,
        tbl_cols=-1,
        tbl_hide_dataframe_shape=True,
        tbl_hide_column_data_types=True,
        tbl_width_chars=200,
    ):
        return str(frame)


def _allocation_frame(payload: dict[str, Any]) -> pl.DataFrame:
    names = payload["players"]
    columns: dict[str, list[Any]] = {"player": list(names)}
    for method, entry in payload["methods"].items():
        columns[method] = [float(entry["phi"][name]) for name in names]
    return pl.DataFrame(columns)


def render_report_table(payload: dict[str, Any]) -> str:
    """Render a solve report as fixed-width tables."""
    header = [f"v(D) = {payload['v_grand']:.{TABLE_DECIMALS}f}"]
    if payload.get("evaluated_count") is not None:
        header.append(f"evaluated = {payload['evaluated_count']}")
    if payload.get("thresholds"):
        thresholds = payload["thresholds"]
        header.append(f"t1 = {thresholds['t1']:g}, t2 = {thresholds['t2']:g}")
    lc = payload["methods"].get("least_core")
    if lc is not None:
        header.append(f"e* = {lc['e_star']:.{TABLE_DECIMALS}f}")

    sections = ["  ".join(header), render_frame(_allocation_frame(payload))]
    if payload.get("comparison"):
        sections.append(render_frame(pl.DataFrame(payload["comparison"])))
    if "binding" in payload:
        sections.append("binding: " + "; ".join(f"{{{k}}}" for k in payload["binding"]))
        if payload["near_binding"]:
            sections.append(
                "near binding: "
                + "; ".join(f"{{{k}}}" for k in payload["near_binding"])
            )
        if payload["zero_payoff"]:
            sections.append("zero payoff: " + ", ".join(payload["zero_payoff"]))
    return "\n\n".join(sections) + "\n"


def render_comparison_table(payload: dict[str, Any]) -> str:
    """Render a multi-input comparison as fixed-width tables."""
    sections = [
        "inputs: " + ", ".join(payload["inputs"]),
        render_frame(_allocation_frame(payload)),
        render_frame(pl.DataFrame(payload["comparison"])),
    ]
    if payload["delta_e_star"]:
        sections.append(render_frame(pl.DataFrame(payload["delta_e_star"])))
    sections.append(render_frame(pl.DataFrame(payload["aggregate"])))
    return "\n\n".join(sections) + "\n"
