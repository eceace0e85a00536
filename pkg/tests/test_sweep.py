"""
Contains tests for threshold sweeps.
"""

import pytest

from coalition_ledger.exceptions import InputError, TooManyPlayers
from coalition_ledger.game import Coalition
from coalition_ledger.oracles import SyntheticSpec, synthetic_oracle, table_oracle
from coalition_ledger.sweep import SWEEP_SCHEMA, full_constraint_game, sweep_thresholds


def test_heart_disease_sweep(heart_game):
    frame = sweep_thresholds(table_oracle(heart_game), 3, [0.7, 0.0, 0.7], [0.0])
    assert frame.schema == SWEEP_SCHEMA
    assert frame["t1"].to_list() == [0.0, 0.7]
    assert frame["evaluated_count"].to_list() == [6, 3]
    # The singletons bind, so dropping the pairs leaves the optimum in place.
    assert frame["e_star"].to_list() == pytest.approx([1.0714 / 3] * 2, abs=1e-9)
    assert frame["e_star_full"].to_list() == pytest.approx([1.0714 / 3] * 2, abs=1e-9)
    assert frame["cosine"].to_list() == pytest.approx([1.0, 1.0], abs=1e-9)
    assert frame["max_abs_diff"].to_list() == pytest.approx([0.0, 0.0], abs=1e-9)


def test_sweep_on_coverage_game_queries_each_coalition_once():
    n = 8
    spec = SyntheticSpec("coverage", seed=3, params={"alpha": 0.5})
    oracle = synthetic_oracle(spec, n)
    grid = [0.0, 0.05, 0.1, 0.2]
    frame = sweep_thresholds(oracle, n, grid, grid, threads=2)
    assert frame.height == 16
    assert oracle.trials_used == (1 << n) - 1

    exact = frame.filter((frame["t1"] == 0.0) & (frame["t2"] == 0.0)).row(0, named=True)
    assert exact["evaluated_count"] == (1 << n) - 2
    assert exact["e_star"] == pytest.approx(exact["e_star_full"], abs=1e-9)
    assert (frame["e_star"] <= frame["e_star_full"] + 1e-9).all()

    for t2 in grid:
        counts = frame.filter(frame["t2"] == t2).sort("t1")["evaluated_count"].to_list()
        assert counts == sorted(counts, reverse=True)


def test_full_constraint_game_pins_the_grand_value(heart_game):
    game = full_constraint_game(table_oracle(heart_game), 0.9)
    assert len(game.values) == 7
    assert game.values[Coalition.grand(3)] == 0.9


def test_sweep_rejects_bad_input(heart_game):
    with pytest.raises(InputError):
        sweep_thresholds(table_oracle(heart_game), 3, [], [0.1])

    spec = SyntheticSpec("additive", params={"weights": [0.01] * 21})
    big = synthetic_oracle(spec, 21)
    with pytest.raises(TooManyPlayers):
        sweep_thresholds(big, 21, [0.1], [0.1])
    assert big.trials_used == 0
