"""
Stack-based coalition enumeration with threshold pruning.

Coalitions are visited depth-first over the canonical set-enumeration tree:
the root is the empty coalition and the children of S are S ∪ {j} for every
j above S's highest member, so each coalition has the unique parent
S minus its highest member. Two rules stop a branch from growing:

- diminishing returns: the child's marginal gain over its parent is below t1;
- performance ceiling: the child is within t2 of the grand coalition's value.

Each decision reads only the child's value, its parent's value and v(D), so
the evaluated set does not depend on the order siblings are visited in.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import polars as pl

from coalition_ledger.exceptions import InputError, OracleError
from coalition_ledger.game import EMPTY, Coalition, Game
from coalition_ledger.oracles.base import ValueOracle
from coalition_ledger.utils import get_thread_count, logger


class Decision(str, Enum):
    EXPANDED = "Expanded"
    PRUNED_RULE1 = "PrunedRule1"
    PRUNED_RULE2 = "PrunedRule2"
    LEAF = "Leaf"


@dataclass(frozen=True)
class PruneConfig:
    """
    Pruning thresholds.

    Attributes:
        t1: Minimum marginal gain over the parent for a branch to keep growing.
        t2: Minimum remaining gap to v(D) for a branch to keep growing.
        v_grand: The grand coalition's value v(D).
    """

    t1: float
    t2: float
    v_grand: float

    def __post_init__(self) -> None:
        for name in ("t1", "t2"):
            threshold = getattr(self, name)
            if not math.isfinite(threshold) or threshold < 0:
                raise InputError(
                    f"{name} must be finite and non-negative, got {threshold}"
                )
        if not math.isfinite(self.v_grand):
            raise InputError(f"v_grand must be finite, got {self.v_grand}")


@dataclass(frozen=True)
class LogEntry:
    coalition: Coalition
    value: float
    parent: Coalition
    decision: Decision


@dataclass
class EvaluationLog:
    """
    Audit trail of one enumeration run.

    Attributes:
        names: The player roster.
        config: The thresholds the run used.
        entries: One entry per evaluated coalition, in visit order.
        trials_used: Oracle trials this run consumed; cached answers are free.
    """

    names: tuple[str, ...]
    config: PruneConfig
    entries: list[LogEntry] = field(default_factory=list)
    trials_used: int = 0

    @property
    def evaluated_count(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[LogEntry]:
        return iter(self.entries)

    def evaluated(self) -> set[Coalition]:
        return {entry.coalition for entry in self.entries}

    def decision_counts(self) -> dict[str, int]:
        counts = {decision.value: 0 for decision in Decision}
        for entry in self.entries:
            counts[entry.decision.value] += 1
        return counts

    def entry_dict(self, entry: LogEntry) -> dict[str, Any]:
        return {
            "coalition": entry.coalition.key(self.names),
            "value": entry.value,
            "parent": entry.parent.key(self.names),
            "decision": entry.decision.value,
        }

    def summary(self) -> dict[str, Any]:
        return {
            "evaluated_count": self.evaluated_count,
            "trials_used": self.trials_used,
            "decisions": self.decision_counts(),
            "config": {
                "t1": self.config.t1,
                "t2": self.config.t2,
                "v_grand": self.config.v_grand,
            },
            "players": list(self.names),
        }

    def to_json_lines(self) -> str:
        """One JSON object per entry, then the summary object."""
        lines = [json.dumps(self.entry_dict(entry)) for entry in self.entries]
        lines.append(json.dumps({"summary": self.summary()}))
        return "\n".join(lines) + "\n"

    def to_frame(self) -> pl.DataFrame:
        """The log as a DataFrame, one row per evaluated coalition."""
        return pl.DataFrame(
            {
                "coalition": [e.coalition.key(self.names) for e in self.entries],
                "size": [len(e.coalition) for e in self.entries],
                "value": [e.value for e in self.entries],
                "parent": [e.parent.key(self.names) for e in self.entries],
                "decision": [e.decision.value for e in self.entries],
            },
            schema={
                "coalition": pl.String,
                "size": pl.Int64,
                "value": pl.Float64,
                "parent": pl.String,
                "decision": pl.String,
            },
        )


def _decide(
    child: Coalition, value: float, parent_value: float, n: int, config: PruneConfig
) -> Decision:
    if value - parent_value < config.t1:
        return Decision.PRUNED_RULE1
    if config.v_grand - value < config.t2:
        return Decision.PRUNED_RULE2
    if child.max_index == n - 1:
        return Decision.LEAF
    return Decision.EXPANDED


def _children(node: Coalition, n: int) -> list[Coalition]:
    grand = Coalition.grand(n)
    return [
        child
        for j in range(node.max_index + 1, n)
        if (child := node.with_player(j)) != grand
    ]


def prune_enumerate(
    oracle: ValueOracle,
    n: int,
    config: PruneConfig,
    threads: int | None = None,
) -> tuple[Game, EvaluationLog]:
    """
    Enumerates coalitions depth-first, pruning with the two threshold rules.

    Args:
        oracle: Source of coalition values.
        n: Number of players.
        config: Pruning thresholds and v(D).
        threads: Maximum concurrent oracle queries; read from the environment
            when omitted.

    Returns:
        A tuple containing:
            - A game holding every evaluated coalition plus the grand
              coalition at v(D).
            - The evaluation log.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if oracle.n != n:
        raise ValueError(f"Oracle serves {oracle.n} players, expected {n}")
    workers = threads if threads is not None else get_thread_count()
    log = EvaluationLog(tuple(oracle.names), config)
    trials_before = oracle.trials_used

    # Each stack item carries its parent's value so it can be decided alone.
    stack: list[tuple[Coalition, Coalition, float]] = [
        (child, EMPTY, 0.0) for child in reversed(_children(EMPTY, n))
    ]
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while stack:
            batch = [stack.pop() for _ in range(min(workers, len(stack)))]
            coalitions = [item[0] for item in batch]
            if executor is None:
                values = [oracle.query(c) for c in coalitions]
            else:
                values = list(executor.map(oracle.query, coalitions))

            for (child, parent, parent_value), value in zip(batch, values):
                decision = _decide(child, value, parent_value, n, config)
                log.entries.append(LogEntry(child, value, parent, decision))
                logger.debug(
                    "{%s} = %r -> %s", child.key(log.names), value, decision.value
                )
                if decision is Decision.EXPANDED:
                    stack.extend(
                        (grandchild, child, value)
                        for grandchild in reversed(_children(child, n))
                    )
    except OracleError as e:
        log.trials_used = oracle.trials_used - trials_before
        e.partial_log = log
        raise
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    log.trials_used = oracle.trials_used - trials_before
    logger.info(
        "Enumeration finished: %d of %d proper coalitions evaluated (t1=%g, t2=%g)",
        log.evaluated_count,
        (1 << n) - 2,
        config.t1,
        config.t2,
    )
    values = {entry.coalition: entry.value for entry in log.entries}
    values[Coalition.grand(n)] = config.v_grand
    return Game(tuple(oracle.names), values), log
