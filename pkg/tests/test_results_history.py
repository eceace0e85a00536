"""
Contains tests for recording solve reports and summarising the run history.
"""

from pathlib import Path

import pytest
from sqlalchemy import create_engine, inspect

from alembic import command
from alembic.config import Config
from coalition_ledger.game import Coalition, Game
from coalition_ledger.models import RunModel, get_session_factory
from coalition_ledger.results_history import (
    HISTORY_SCHEMA,
    load_history,
    record_run,
    summarise_history,
)
from coalition_ledger.utils import get_database_url

ROOT = Path(__file__).resolve().parents[1]


def test_record_run(db_session, heart_game, make_report):
    report = make_report(heart_game, (0.1, 0.05))
    run_id = record_run(report, db_session)

    run = db_session.get(RunModel, run_id)
    assert run.roster == "a,b,c"
    assert run.players == ["a", "b", "c"]
    assert run.v_grand == 0.8571
    assert (run.t1, run.t2) == (0.1, 0.05)
    assert run.evaluated_count == 6
    assert run.e_star == pytest.approx(1.0714 / 3)
    assert run.methods == ["least_core", "shapley"]
    assert run.report == report
    assert run.date_created is not None


def test_full_table_run_has_no_thresholds(db_session, heart_game, make_report):
    run_id = record_run(make_report(heart_game), db_session)
    run = db_session.get(RunModel, run_id)
    assert run.t1 is None and run.t2 is None


def test_history_summary_groups_by_roster(db_session, heart_game, make_report):
    values = dict(heart_game.values)
    values[Coalition.of([0, 1])] = 0.8
    record_run(make_report(heart_game), db_session)
    record_run(make_report(heart_game.with_values(values)), db_session)
    renamed = Game(("x", "y", "z"), dict(heart_game.values))
    record_run(make_report(renamed), db_session)

    runs = load_history(db_session)
    assert [run.id for run in runs] == [1, 2, 3]
    assert len(load_history(db_session, ["a", "b", "c"])) == 2
    assert load_history(db_session, ["nobody"]) == []

    summary = summarise_history(runs)
    assert summary.schema == HISTORY_SCHEMA
    assert summary.height == 12
    assert summary["roster"].unique().sort().to_list() == ["a,b,c", "x,y,z"]
    shapley_a = summary.filter(
        (summary["roster"] == "a,b,c")
        & (summary["method"] == "shapley")
        & (summary["player"] == "a")
    ).row(0, named=True)
    assert shapley_a["count"] == 2
    assert shapley_a["min"] <= shapley_a["mean"] <= shapley_a["max"]

    single = summary.filter(summary["roster"] == "x,y,z")
    assert single["count"].to_list() == [1] * 6


def test_empty_history_summary():
    summary = summarise_history([])
    assert summary.is_empty()
    assert summary.schema == HISTORY_SCHEMA


def test_session_factory_follows_environment(
    monkeypatch, tmp_path, heart_game, make_report
):
    url = f"sqlite:///{tmp_path / 'other.db'}"
    monkeypatch.setenv("COALITION_LEDGER_DB", url)
    assert get_database_url() == url
    with get_session_factory()() as session:
        record_run(make_report(heart_game), session)
    assert (tmp_path / "other.db").exists()
    assert get_session_factory() is get_session_factory(url)


def test_migrations_create_the_runs_table(tmp_path, monkeypatch):
    path = tmp_path / "migrated.db"
    monkeypatch.setenv("COALITION_LEDGER_DB", f"sqlite:///{path}")
    config = Config(str(ROOT / "alembic.ini"))
    config.set_main_option("script_location", str(ROOT / "alembic"))
    command.upgrade(config, "head")

    inspector = inspect(create_engine(f"sqlite:///{path}"))
    columns = {column["name"] for column in inspector.get_columns("runs")}
    assert columns == {column.name for column in RunModel.__table__.columns}
    assert [index["name"] for index in inspector.get_indexes("runs")] == [
        "ix_runs_roster"
    ]
