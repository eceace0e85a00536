"""Threshold sweeps: how pruning trades evaluation cost against allocation quality."""

from __future__ import annotations

import itertools
from collections.abc import Sequence

import polars as pl

from coalition_ledger.allocator import (
    cosine_similarity,
    max_abs_difference,
    solve_least_core,
)
from coalition_ledger.exceptions import InputError, TooManyPlayers
from coalition_ledger.game import Coalition, Game
from coalition_ledger.oracles.base import ValueOracle
from coalition_ledger.pruner import PruneConfig, prune_enumerate
from coalition_ledger.utils import MAX_REFERENCE_PLAYERS, logger

SWEEP_SCHEMA = {
    "t1": pl.Float64,
    "t2": pl.Float64,
    "evaluated_count": pl.Int64,
    "e_star": pl.Float64,
    "e_star_full": pl.Float64,
    "cosine": pl.Float64,
    "max_abs_diff": pl.Float64,
}


def full_constraint_game(oracle: ValueOracle, v_grand: float) -> Game:
    """Every proper nonempty coalition plus D at v_grand."""
    n = oracle.n
    coalitions = [Coalition(bits) for bits in range(1, (1 << n) - 1)]
    values = {c: oracle.query(c) for c in coalitions}
    values[Coalition.grand(n)] = v_grand
    return Game(oracle.names, values)


def sweep_thresholds(
    oracle: ValueOracle,
    n: int,
    t1_grid: Sequence[float],
    t2_grid: Sequence[float],
    threads: int | None = None,
) -> pl.DataFrame:
    """
    Runs pruned least-core solves over a grid of thresholds.

    Each grid point is compared against the least core over every proper
    coalition. The oracle's memo is shared, so no coalition is trialled twice.

    Args:
        oracle: Source of coalition values.
        n: Number of players.
        t1_grid: Diminishing-returns thresholds to try.
        t2_grid: Performance-ceiling thresholds to try.
        threads: Maximum concurrent oracle queries.

    Returns:
        One row per (t1, t2) pair, ordered by t1 then t2.
    """
    if n > MAX_REFERENCE_PLAYERS:
        raise TooManyPlayers(
            f"A sweep enumerates every coalition for its reference; "
            f"at most {MAX_REFERENCE_PLAYERS} players are supported, got {n}"
        )
    if not t1_grid or not t2_grid:
        raise InputError("Threshold grids must not be empty")

    v_grand = oracle.query(Coalition.grand(n))
    reference = solve_least_core(full_constraint_game(oracle, v_grand), v_grand)

    rows = []
    for t1, t2 in itertools.product(sorted(set(t1_grid)), sorted(set(t2_grid))):
        fragment, log = prune_enumerate(
            oracle, n, PruneConfig(t1, t2, v_grand), threads=threads
        )
        pruned = solve_least_core(fragment, v_grand)
        rows.append(
            {
                "t1": t1,
                "t2": t2,
                "evaluated_count": log.evaluated_count,
                "e_star": pruned.e_star,
                "e_star_full": reference.e_star,
                "cosine": cosine_similarity(pruned.phi.phi, reference.phi.phi),
                "max_abs_diff": max_abs_difference(pruned.phi.phi, reference.phi.phi),
            }
        )
    logger.info(
        "Sweep of %d threshold pairs used %d oracle trials",
        len(rows),
        oracle.trials_used,
    )
    return pl.DataFrame(rows, schema=SWEEP_SCHEMA)
