"""
Contains tests for the least core and the baseline allocation methods.
"""

import itertools

import numpy as np
import pytest

from coalition_ledger.allocator import (
    build_least_core_lp,
    compare,
    cosine_similarity,
    leave_one_out,
    leave_one_out_game,
    materialize_game,
    proportional,
    shapley_exact,
    solve_least_core,
)
from coalition_ledger.exceptions import (
    DegenerateWeights,
    IncompleteTable,
    MismatchedGames,
    MissingSingleton,
    MissingWeights,
    TooManyPlayers,
)
from coalition_ledger.game import Allocation, Coalition, Game, grand_value
from coalition_ledger.oracles import SyntheticSpec, synthetic_oracle
from coalition_ledger.pruner import PruneConfig, prune_enumerate


def max_deficit(game, phi):
    grand = game.grand_coalition
    return max(
        v - sum(phi[i] for i in c.members())
        for c, v in game.values.items()
        if c != grand
    )


def test_heart_disease_least_core(heart_game):
    result = solve_least_core(heart_game, 0.8571)
    assert result.phi.phi == pytest.approx((0.142867, 0.249967, 0.464267), abs=1e-6)
    assert result.e_star == pytest.approx(1.0714 / 3, abs=1e-9)
    assert result.phi.total == pytest.approx(0.8571, abs=1e-9)
    assert result.binding == [Coalition.of([0]), Coalition.of([1]), Coalition.of([2])]
    assert result.near_binding == []
    assert result.zero_payoff == []
    assert result.deficits[Coalition.of([0, 1])] == pytest.approx(0.250067, abs=1e-6)
    assert Coalition.grand(3) not in result.deficits


def test_heart_disease_baselines(heart_game):
    shapley = shapley_exact(heart_game)
    assert shapley.phi == pytest.approx((0.178583, 0.249983, 0.428533), abs=1e-6)
    loo = leave_one_out(heart_game)
    ninth = 0.8571 / 9
    assert loo.phi == pytest.approx((ninth, 2 * ninth, 6 * ninth), abs=1e-9)

    least_core = solve_least_core(heart_game, 0.8571).phi
    # The least core pays the strongest singleton more and the weakest less.
    assert least_core.phi[2] > shapley.phi[2]
    assert least_core.phi[0] < shapley.phi[0]

    report = compare([shapley, loo, least_core])
    assert [a.method for a in report.allocations] == [
        "least_core",
        "shapley",
        "leave_one_out",
    ]
    first = report.comparisons[0]
    assert (first.left, first.right) == ("least_core", "shapley")
    assert first.max_abs_diff == pytest.approx(0.0357, abs=1e-4)
    assert first.cosine > 0.99
    assert len(report.comparisons) == 3


def test_lp_rows_follow_bitmask_order(heart_game):
    lp = build_least_core_lp(heart_game, 0.8571)
    assert lp.num_vars == 4
    assert lp.num_ineq == 6
    assert lp.b_ub.tolist() == [-0.5, -0.6071, -0.6429, -0.8214, -0.7857, -0.8214]
    assert lp.a_ub[2].tolist() == [-1.0, -1.0, 0.0, -1.0]
    assert lp.a_eq.tolist() == [[1.0, 1.0, 1.0, 0.0]]


@pytest.mark.parametrize("seed", range(50))
def test_additive_game_is_pinpointed(make_game, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    weights = rng.uniform(0.0, 1.0, size=n)
    game = make_game(n, lambda members: float(np.sum(weights[list(members)])))
    result = solve_least_core(game, grand_value(game))
    assert result.e_star == pytest.approx(0.0, abs=1e-9)
    assert result.phi.phi == pytest.approx(tuple(weights), abs=1e-9)
    assert shapley_exact(game).phi == pytest.approx(tuple(weights), abs=1e-9)


def test_unanimity_game_pays_nothing_outside_the_carrier(unanimity_game):
    result = solve_least_core(unanimity_game, 1.0)
    a, b, c = result.phi.phi
    assert result.e_star == pytest.approx(0.0, abs=1e-9)
    assert c == pytest.approx(0.0, abs=1e-9)
    assert a + b == pytest.approx(1.0, abs=1e-9)
    assert min(a, b) >= -1e-9
    assert 2 in result.zero_payoff
    assert shapley_exact(unanimity_game).phi == pytest.approx((0.5, 0.5, 0.0))


@pytest.mark.parametrize("seed", range(10))
def test_shapley_axioms(random_game, make_game, seed):
    n = 3 + seed % 6
    game = random_game(n, seed)
    phi = shapley_exact(game).phi
    assert sum(phi) == pytest.approx(grand_value(game), abs=1e-9)

    other = random_game(n, seed + 100)
    combined = make_game(
        n,
        lambda members: game.values[Coalition.of(members)]
        + other.values[Coalition.of(members)],
    )
    assert shapley_exact(combined).phi == pytest.approx(
        tuple(np.add(phi, shapley_exact(other).phi)), abs=1e-9
    )

    # Player 0 adds nothing anywhere.
    null = make_game(
        n,
        lambda members: game.values.get(
            Coalition.of([i for i in members if i != 0]), 0.0
        ),
    )
    assert shapley_exact(null).phi[0] == pytest.approx(0.0, abs=1e-12)


def test_shapley_symmetry(make_game):
    sizes = [0.0, 0.3, 0.5, 0.9, 1.0]
    game = make_game(4, lambda members: sizes[len(members)])
    assert shapley_exact(game).phi == pytest.approx((0.25,) * 4)


@pytest.mark.parametrize("scale", [0.5, 3.0, 1000.0])
def test_least_core_scales_with_the_game(random_game, scale):
    game = random_game(5, 3)
    scaled = game.with_values({c: scale * v for c, v in game.values.items()})
    base = solve_least_core(game, grand_value(game))
    result = solve_least_core(scaled, grand_value(scaled))
    assert result.e_star == pytest.approx(scale * base.e_star, rel=1e-9, abs=1e-9)
    assert max_deficit(scaled, result.phi.phi) == pytest.approx(
        result.e_star, rel=1e-9, abs=1e-9
    )


@pytest.mark.parametrize("seed", range(100))
def test_pruned_constraints_relax_the_optimum(seed):
    n = 6
    spec = SyntheticSpec("coverage", seed=seed, params={"alpha": 0.5})
    oracle = synthetic_oracle(spec, n)
    full = materialize_game(oracle)
    v_grand = grand_value(full)
    fragment, _ = prune_enumerate(oracle, n, PruneConfig(0.1, 0.1, v_grand), threads=1)
    pruned = solve_least_core(fragment, v_grand)
    exact = solve_least_core(full, v_grand)
    assert pruned.e_star <= exact.e_star + 1e-9
    assert max_deficit(full, exact.phi.phi) == pytest.approx(exact.e_star, abs=1e-9)
    similarity = cosine_similarity(pruned.phi.phi, exact.phi.phi)
    assert -1.0 <= similarity <= 1.0
    print(f"seed {seed}: pruned vs full least core cosine = {similarity:.6f}")


def test_single_player_game():
    game = Game(("solo",), {Coalition.grand(1): 0.4})
    result = solve_least_core(game, 0.4)
    assert result.phi.phi == (0.4,)
    assert result.e_star == 0.0
    assert result.binding == [Coalition.grand(1)]


def test_missing_singleton_is_rejected(heart_game):
    values = dict(heart_game.values)
    del values[Coalition.of([1])]
    with pytest.raises(MissingSingleton) as excinfo:
        solve_least_core(heart_game.with_values(values), 0.8571)
    assert "b" in str(excinfo.value)


def test_shapley_needs_every_coalition(heart_game):
    values = dict(heart_game.values)
    del values[Coalition.of([0, 2])]
    with pytest.raises(IncompleteTable) as excinfo:
        shapley_exact(heart_game.with_values(values))
    assert excinfo.value.missing == ["a,c"]


def test_exact_methods_refuse_large_rosters():
    names = tuple(f"p{i}" for i in range(25))
    with pytest.raises(TooManyPlayers):
        shapley_exact(Game(names, {Coalition.grand(25): 1.0}))
    spec = SyntheticSpec("additive", params={"weights": [0.04] * 25})
    with pytest.raises(TooManyPlayers):
        materialize_game(synthetic_oracle(spec, 25))


def test_leave_one_out_edge_cases(make_game):
    flat = make_game(3, lambda members: 1.0)
    assert leave_one_out(flat).phi == pytest.approx((1 / 3,) * 3)

    # Removing player 0 raises the value, so its loss is floored at zero.
    table = {(0, 1): 0.5, (0, 2): 0.5, (1, 2): 0.9, (0, 1, 2): 0.8}
    game = make_game(3, lambda members: table.get(members, 0.1))
    assert leave_one_out(game).phi == pytest.approx((0.0, 0.4, 0.4))

    sparse = Game(("a", "b"), {Coalition.grand(2): 1.0, Coalition.of([0]): 0.2})
    with pytest.raises(IncompleteTable) as excinfo:
        leave_one_out(sparse)
    assert excinfo.value.missing == ["b"]


def test_leave_one_out_game_queries_only_what_it_needs():
    spec = SyntheticSpec("additive", params={"weights": [0.1] * 10})
    oracle = synthetic_oracle(spec, 10)
    game = leave_one_out_game(oracle)
    assert len(game.values) == 11
    assert oracle.trials_used == 11
    assert leave_one_out(game).phi == pytest.approx((0.1,) * 10)


@pytest.mark.parametrize(
    "weights, expected",
    [
        ((4817, 1800, 1700, 1683), (0.4817, 0.18, 0.17, 0.1683)),
        ((2, 1, 1), (0.5, 0.25, 0.25)),
        ((0, 0, 5), (0.0, 0.0, 1.0)),
    ],
)
def test_proportional(weights, expected):
    names = tuple("abcd"[: len(weights)])
    game = Game(names, {Coalition.grand(len(names)): 1.0}, weights)
    allocation = proportional(game)
    assert allocation.phi == pytest.approx(expected)
    assert allocation.total == pytest.approx(1.0)


def test_proportional_needs_usable_weights(heart_game):
    with pytest.raises(MissingWeights):
        proportional(heart_game)
    with pytest.raises(DegenerateWeights):
        proportional(Game(("a", "b"), {Coalition.grand(2): 1.0}, (0, 0)))


@pytest.mark.parametrize(
    "left, right, expected",
    [
        ((0.0, 0.0), (0.0, 0.0), 1.0),
        ((0.0, 0.0), (1.0, 0.0), 0.0),
        ((1.0, 2.0), (2.0, 4.0), 1.0),
        ((1.0, 0.0), (-1.0, 0.0), -1.0),
        ((1.0, 0.0), (0.0, 1.0), 0.0),
    ],
)
def test_cosine_similarity(left, right, expected):
    assert cosine_similarity(left, right) == pytest.approx(expected)


@pytest.mark.parametrize(
    "other",
    [
        Allocation((0.5, 0.5, 0.0), "shapley"),
        Allocation((0.5, 0.6), "shapley"),
    ],
)
def test_compare_rejects_different_games(other):
    with pytest.raises(MismatchedGames):
        compare([Allocation((0.5, 0.5), "least_core"), other])


def test_compare_keeps_run_metadata():
    allocations = [
        Allocation((0.5, 0.5), "least_core"),
        Allocation((0.4, 0.6), "shapley"),
    ]
    report = compare(allocations, evaluated_count=2, e_star=-0.1)
    assert report.evaluated_count == 2
    assert report.e_star == -0.1
    assert report.allocation("shapley") is allocations[1]
    assert report.allocation("proportional") is None
    assert compare([]).comparisons == []


def test_compare_orders_tagged_methods():
    tags = ["shapley@b", "least_core@b", "shapley@a", "least_core@a"]
    report = compare([Allocation((0.5, 0.5), tag) for tag in tags])
    assert [a.method for a in report.allocations] == [
        "least_core@a",
        "least_core@b",
        "shapley@a",
        "shapley@b",
    ]
    assert len(report.comparisons) == len(list(itertools.combinations(tags, 2)))


def test_two_player_program_shape():
    game = Game(("a", "b"), {Coalition.of([0]): 0.4, Coalition.of([1]): 0.5})
    lp = build_least_core_lp(game, 1.0)
    assert (lp.num_vars, lp.num_eq, lp.num_ineq) == (3, 1, 2)


def test_leave_one_out_of_additive_game(additive_game):
    assert leave_one_out(additive_game).phi == pytest.approx((0.2, 0.3, 0.5))


def test_identical_allocations_are_fully_similar():
    phi = (0.1, 0.2, 0.7)
    allocations = [Allocation(phi, "shapley"), Allocation(phi, "least_core")]
    (pair,) = compare(allocations).comparisons
    assert pair.cosine == pytest.approx(1.0)
    assert pair.max_abs_diff == 0.0
