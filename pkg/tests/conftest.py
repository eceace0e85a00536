"""
Contains pytest fixtures for tests, such as example games and oracles.
"""

import sys
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from coalition_ledger.allocator import compare, shapley_exact, solve_least_core
from coalition_ledger.game import (
    Coalition,
    Game,
    game_from_dict,
    grand_value,
    save_game,
)
from coalition_ledger.models import Base
from coalition_ledger.report import build_report
from coalition_ledger.utils import DB_ENV_VAR, THREADS_ENV_VAR

HEART_DISEASE = {
    "players": ["a", "b", "c"],
    "values": {
        "a": 0.5,
        "b": 0.6071,
        "c": 0.8214,
        "a,b": 0.6429,
        "a,c": 0.7857,
        "b,c": 0.8214,
        "a,b,c": 0.8571,
    },
}

STUB_ORACLE = Path(__file__).resolve().parents[1] / "scripts" / "stub_oracle.py"
STAMP = "2026-01-01T00:00:00+00:00"


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch, tmp_path):
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
    monkeypatch.setenv(DB_ENV_VAR, f"sqlite:///{tmp_path / 'runs.db'}")


@pytest.fixture
def heart_game() -> Game:
    return game_from_dict(HEART_DISEASE)


@pytest.fixture
def heart_path(tmp_path, heart_game) -> Path:
    path = tmp_path / "heart.json"
    save_game(path, heart_game)
    return path


@pytest.fixture
def make_game() -> Callable[..., Game]:
    """Build a complete game from a value function over member-index tuples."""

    def _make(
        n: int,
        value: Callable[[tuple[int, ...]], float],
        weights: tuple[float, ...] | None = None,
    ) -> Game:
        names = tuple(chr(ord("a") + i) for i in range(n))
        values = {
            Coalition(bits): float(value(Coalition(bits).members()))
            for bits in range(1, 1 << n)
        }
        return Game(names, values, weights)

    return _make


@pytest.fixture
def additive_game(make_game) -> Game:
    weights = (0.2, 0.3, 0.5)
    return make_game(3, lambda members: sum(weights[i] for i in members))


@pytest.fixture
def unanimity_game(make_game) -> Game:
    return make_game(3, lambda members: 1.0 if {0, 1} <= set(members) else 0.0)


@pytest.fixture
def random_game(make_game) -> Callable[[int, int], Game]:
    """A complete game with independent uniform values, seeded."""

    def _random(n: int, seed: int) -> Game:
        rng = np.random.default_rng(seed)
        table = rng.uniform(0.0, 1.0, size=1 << n)
        return make_game(n, lambda members: table[Coalition.of(members).bits])

    return _random


@pytest.fixture
def stub_command() -> Callable[[Path], str]:
    """Shell command running the table-lookup oracle script over a game file."""

    def _command(game_path: Path) -> str:
        return f'"{sys.executable}" "{STUB_ORACLE}" "{game_path}"'

    return _command


@pytest.fixture
def db_session():
    engine = create_engine("sqlite:///:memory:")
    Base.metadata.create_all(engine)
    session = sessionmaker(bind=engine)()
    yield session
    session.close()


@pytest.fixture
def make_report() -> Callable[..., dict]:
    """Solve a complete game with the least core and Shapley into a report payload."""

    def _report(game: Game, thresholds: tuple[float, float] | None = None) -> dict:
        v_grand = grand_value(game)
        least_core = solve_least_core(game, v_grand)
        report = compare(
            [shapley_exact(game), least_core.phi],
            evaluated_count=len(game.values) - 1,
            e_star=least_core.e_star,
        )
        return build_report(game.names, v_grand, report, least_core, thresholds, STAMP)

    return _report
