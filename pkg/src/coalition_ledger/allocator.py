"""
Payoff allocation: the least core over an evaluated set of coalitions and the
Shapley, leave-one-out and proportional baselines.

The least core distributes v(D) so that the largest deficit
e(S) = v(S) - Σ_{i∈S} φ_i over the constrained coalitions is as small as
possible. A negative optimum e* means every constrained coalition is paid
more than it could earn alone, i.e. the federation hands out a bonus.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from coalition_ledger.exceptions import (
    DegenerateWeights,
    IncompleteTable,
    LpStatusError,
    MismatchedGames,
    MissingSingleton,
    MissingWeights,
    TooManyPlayers,
)
from coalition_ledger.game import Allocation, Coalition, Game, grand_value, value_of
from coalition_ledger.lp_solver import LinearProgram, LpStatus, solve_lp
from coalition_ledger.oracles.base import ValueOracle
from coalition_ledger.utils import (
    BINDING_TOLERANCE,
    GAME_MATCH_TOLERANCE,
    MAX_SHAPLEY_PLAYERS,
    METHOD_ORDER,
    NEAR_BINDING_BAND,
    ZERO_PAYOFF_TOLERANCE,
    logger,
)


@dataclass(frozen=True)
class LeastCoreResult:
    """
    A solved least core.

    Attributes:
        phi: The efficient payoff allocation.
        e_star: The optimal maximum deficit.
        deficits: v(S) - Σ φ_i for every constrained coalition.
        binding: Constrained coalitions whose deficit equals e_star.
        near_binding: Coalitions within NEAR_BINDING_BAND of e_star that are
            not binding.
        zero_payoff: Indices of players paid nothing (free riders).
    """

    phi: Allocation
    e_star: float
    deficits: dict[Coalition, float]
    binding: list[Coalition]
    near_binding: list[Coalition] = field(default_factory=list)
    zero_payoff: list[int] = field(default_factory=list)


def _constrained_coalitions(constrained: Game) -> list[Coalition]:
    grand = constrained.grand_coalition
    return sorted(c for c in constrained.values if c != grand)


def build_least_core_lp(constrained: Game, v_grand: float) -> LinearProgram:
    """
    Formulates the least-core linear program.

    Variables are (φ_1 … φ_n, e) and the objective minimises e, subject to
    Σ φ_i = v(D) and, for every constrained coalition S,
    -Σ_{i∈S} φ_i - e ≤ -v(S). Rows are ordered by coalition bitmask. A
    grand-coalition entry in the fragment adds no row.

    Args:
        constrained: Game holding the evaluated coalitions; every singleton
            must be present.
        v_grand: The value to distribute.

    Returns:
        The linear program.
    """
    n = constrained.n
    for i, name in enumerate(constrained.names):
        singleton = Coalition.of([i])
        if n > 1 and singleton not in constrained.values:
            raise MissingSingleton(name)

    coalitions = _constrained_coalitions(constrained)
    a_ub = np.zeros((len(coalitions), n + 1))
    b_ub = np.zeros(len(coalitions))
    for row, coalition in enumerate(coalitions):
        a_ub[row, list(coalition.members())] = -1.0
        a_ub[row, n] = -1.0
        b_ub[row] = -constrained.values[coalition]
    objective = np.zeros(n + 1)
    objective[n] = 1.0
    a_eq = np.concatenate([np.ones(n), [0.0]]).reshape(1, -1)
    return LinearProgram(objective, a_ub, b_ub, a_eq, np.array([v_grand]))


def solve_least_core(constrained: Game, v_grand: float) -> LeastCoreResult:
    """
    Solves the least core over the constrained coalitions.

    Args:
        constrained: Game holding the evaluated coalitions, all singletons
            included.
        v_grand: The grand coalition's value.

    Returns:
        The allocation, e*, per-coalition deficits and constraint tiers.
    """
    n = constrained.n
    if n == 1:
        grand = constrained.grand_coalition
        return LeastCoreResult(
            Allocation((v_grand,), "least_core"), 0.0, {grand: 0.0}, [grand]
        )

    lp = build_least_core_lp(constrained, v_grand)
    solution = solve_lp(lp)
    if solution.status is not LpStatus.OPTIMAL or solution.x is None:
        raise LpStatusError(
            f"Least-core program reported {solution.status.value}; "
            "a program with every singleton row is always feasible and bounded"
        )
    phi = tuple(float(p) for p in solution.x[:n])
    e_star = float(solution.x[n])

    deficits = {
        c: constrained.values[c] - math.fsum(phi[i] for i in c.members())
        for c in _constrained_coalitions(constrained)
    }
    binding = [
        c for c, gap in deficits.items() if abs(gap - e_star) <= BINDING_TOLERANCE
    ]
    near_binding = [
        c
        for c, gap in deficits.items()
        if c not in binding and e_star - gap <= NEAR_BINDING_BAND
    ]
    zero_payoff = [i for i, p in enumerate(phi) if abs(p) <= ZERO_PAYOFF_TOLERANCE]
    logger.info(
        "Least core solved over %d constraints: e* = %r, %d binding",
        len(deficits),
        e_star,
        len(binding),
    )
    return LeastCoreResult(
        Allocation(phi, "least_core"),
        e_star,
        deficits,
        binding,
        near_binding,
        zero_payoff,
    )


def _shapley_weights(n: int) -> np.ndarray:
    """|S|!(n-|S|-1)!/n! for |S| = 0 … n-1."""
    return np.array([1.0 / (n * math.comb(n - 1, s)) for s in range(n)])


def shapley_exact(game: Game) -> Allocation:
    """
    Computes the exact Shapley value by walking every coalition.

    Args:
        game: A game whose table holds every nonempty coalition.

    Returns:
        The Shapley allocation.
    """
    n = game.n
    if n > MAX_SHAPLEY_PLAYERS:
        raise TooManyPlayers(
            f"Exact Shapley supports at most {MAX_SHAPLEY_PLAYERS} players, got {n}"
        )
    size = 1 << n
    table = np.zeros(size)
    present = np.zeros(size, dtype=bool)
    for coalition, value in game.values.items():
        table[coalition.bits] = value
        present[coalition.bits] = True
    missing = np.flatnonzero(~present[1:]) + 1
    if missing.size:
        raise IncompleteTable([game.key(Coalition(int(bits))) for bits in missing])

    masks = np.arange(size, dtype=np.int64)
    sizes = np.bitwise_count(masks)
    weights = _shapley_weights(n)
    phi = []
    for i in range(n):
        without = masks[(masks >> i) & 1 == 0]
        marginals = table[without | (1 << i)] - table[without]
        phi.append(float(np.sum(weights[sizes[without]] * marginals)))
    return Allocation(tuple(phi), "shapley")


def leave_one_out(game: Game) -> Allocation:
    """
    Computes leave-one-out payoffs.

    Marginal losses v(D) - v(D minus i) are floored at zero and normalised to
    sum to v(D); if every loss is zero, v(D) is split equally.

    Args:
        game: A game holding D and every D minus one player.

    Returns:
        The leave-one-out allocation.
    """
    v_grand = grand_value(game)
    grand = game.grand_coalition
    losses = []
    missing = []
    for i in range(game.n):
        rest = grand.without_player(i)
        value = value_of(game, rest)
        if value is None:
            missing.append(game.key(rest))
            continue
        losses.append(max(0.0, v_grand - value))
    if missing:
        raise IncompleteTable(missing)

    total = math.fsum(losses)
    if total <= 0.0:
        return Allocation(tuple(v_grand / game.n for _ in losses), "leave_one_out")
    return Allocation(tuple(v_grand * m / total for m in losses), "leave_one_out")


def proportional(game: Game) -> Allocation:
    """
    Splits v(D) in proportion to the per-player weights (e.g. data volume).

    Args:
        game: A game carrying weights.

    Returns:
        The proportional allocation.
    """
    if game.weights is None:
        raise MissingWeights("Proportional allocation needs per-player weights")
    total = math.fsum(game.weights)
    if total <= 0.0:
        raise DegenerateWeights("Proportional weights sum to zero")
    v_grand = grand_value(game)
    return Allocation(tuple(v_grand * w / total for w in game.weights), "proportional")


def materialize_game(
    oracle: ValueOracle, weights: Sequence[float] | None = None
) -> Game:
    """
    Queries every nonempty coalition so exact methods can run on an oracle.

    Args:
        oracle: The value source.
        weights: Optional per-player weights to carry along.

    Returns:
        The complete game.
    """
    if oracle.n > MAX_SHAPLEY_PLAYERS:
        raise TooManyPlayers(
            f"Cannot enumerate every coalition of {oracle.n} players "
            f"(limit {MAX_SHAPLEY_PLAYERS})"
        )
    coalitions = [Coalition(bits) for bits in range(1, 1 << oracle.n)]
    values = {c: oracle.query(c) for c in coalitions}
    return Game(oracle.names, values, None if weights is None else tuple(weights))


def leave_one_out_game(
    oracle: ValueOracle, weights: Sequence[float] | None = None
) -> Game:
    """Queries D and each D minus one player, the coalitions leave-one-out reads."""
    grand = Coalition.grand(oracle.n)
    coalitions = [grand] + [grand.without_player(i) for i in range(oracle.n)]
    values = {c: oracle.query(c) for c in coalitions if not c.is_empty}
    return Game(oracle.names, values, None if weights is None else tuple(weights))


@dataclass(frozen=True)
class PairComparison:
    """Similarity between two allocations of the same game."""

    left: str
    right: str
    cosine: float
    max_abs_diff: float


@dataclass(frozen=True)
class AllocationReport:
    """
    Allocations of one game side by side.

    Attributes:
        allocations: One allocation per method, ordered by method tag.
        comparisons: Every unordered pair of allocations, in the same order.
        evaluated_count: Coalitions evaluated by the run, when known.
        e_star: The least-core optimum, when the least core was solved.
    """

    allocations: list[Allocation]
    comparisons: list[PairComparison]
    evaluated_count: int | None = None
    e_star: float | None = None

    def allocation(self, method: str) -> Allocation | None:
        return next((a for a in self.allocations if a.method == method), None)


def _method_rank(tag: str) -> tuple[int, str]:
    base = tag.split("@", 1)[0]
    rank = METHOD_ORDER.index(base) if base in METHOD_ORDER else len(METHOD_ORDER)
    return rank, tag


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """
    Cosine of the angle between two payoff vectors, clipped to [-1, 1].

    Two zero vectors count as identical; a zero vector against a nonzero one
    scores 0.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    norm_x = float(np.linalg.norm(x))
    norm_y = float(np.linalg.norm(y))
    if norm_x == 0.0 or norm_y == 0.0:
        return 1.0 if norm_x == norm_y else 0.0
    return float(np.clip(np.dot(x, y) / (norm_x * norm_y), -1.0, 1.0))


def max_abs_difference(a: Sequence[float], b: Sequence[float]) -> float:
    gap = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(np.max(np.abs(gap)))


def compare(
    allocations: Sequence[Allocation],
    evaluated_count: int | None = None,
    e_star: float | None = None,
) -> AllocationReport:
    """
    Computes pairwise similarity between allocations of the same game.

    Args:
        allocations: Allocations sharing the player count and v(D).
        evaluated_count: Carried into the report unchanged.
        e_star: Carried into the report unchanged.

    Returns:
        The report, rows ordered by method tag.
    """
    ordered = sorted(allocations, key=lambda a: _method_rank(a.method))
    if ordered:
        first = ordered[0]
        for other in ordered[1:]:
            if len(other.phi) != len(first.phi):
                raise MismatchedGames(
                    f"{first.method} pays {len(first.phi)} players but "
                    f"{other.method} pays {len(other.phi)}"
                )
            scale = max(1.0, abs(first.total))
            if abs(other.total - first.total) > GAME_MATCH_TOLERANCE * scale:
                raise MismatchedGames(
                    f"{first.method} distributes {first.total!r} but "
                    f"{other.method} distributes {other.total!r}"
                )
    comparisons = [
        PairComparison(
            left.method,
            right.method,
            cosine_similarity(left.phi, right.phi),
            max_abs_difference(left.phi, right.phi),
        )
        for i, left in enumerate(ordered)
        for right in ordered[i + 1 :]
    ]
    return AllocationReport(ordered, comparisons, evaluated_count, e_star)
