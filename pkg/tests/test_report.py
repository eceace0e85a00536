"""
Contains tests for building, reading, rendering and comparing reports.
"""

import json

import pytest

from coalition_ledger.exceptions import InputError, MismatchedGames, ReportFormatError
from coalition_ledger.game import Coalition
from coalition_ledger.report import (
    aggregate_payoffs,
    allocations_from_report,
    compare_reports,
    dumps_report,
    load_report,
    payoff_frame,
    render_comparison_table,
    render_report_table,
)


@pytest.fixture
def heart_report(heart_game, make_report):
    return make_report(heart_game, (0.0, 0.0))


@pytest.fixture
def other_report(heart_game, make_report):
    values = dict(heart_game.values)
    values[Coalition.of([0, 1])] = 0.8
    return make_report(heart_game.with_values(values))


def test_report_payload(heart_report):
    assert list(heart_report) == [
        "players",
        "v_grand",
        "thresholds",
        "evaluated_count",
        "methods",
        "deficits",
        "binding",
        "near_binding",
        "zero_payoff",
        "comparison",
        "generated_at",
    ]
    assert heart_report["thresholds"] == {"t1": 0.0, "t2": 0.0}
    assert heart_report["evaluated_count"] == 6
    assert list(heart_report["methods"]) == ["least_core", "shapley"]
    least_core = heart_report["methods"]["least_core"]
    assert least_core["e_star"] == pytest.approx(1.0714 / 3)
    assert least_core["phi"]["c"] == pytest.approx(0.464267, abs=1e-6)
    assert "e_star" not in heart_report["methods"]["shapley"]
    assert list(heart_report["deficits"]) == ["a", "b", "a,b", "c", "a,c", "b,c"]
    assert heart_report["binding"] == ["a", "b", "c"]
    assert heart_report["zero_payoff"] == []
    assert heart_report["comparison"][0]["left"] == "least_core"
    assert heart_report["generated_at"] == "2026-01-01T00:00:00+00:00"


def test_full_table_report_has_no_thresholds(other_report):
    assert other_report["thresholds"] is None


def test_report_file_round_trip(tmp_path, heart_report):
    path = tmp_path / "report.json"
    text = dumps_report(heart_report)
    assert text.endswith("}\n")
    path.write_text(text)
    assert load_report(path) == json.loads(text)


@pytest.mark.parametrize(
    "content",
    [None, "{broken", "[]", '{"players": ["a"], "v_grand": 1.0}'],
)
def test_unreadable_reports(tmp_path, content):
    path = tmp_path / "report.json"
    if content is not None:
        path.write_text(content)
    with pytest.raises(ReportFormatError):
        load_report(path)


def test_allocations_from_report(heart_report):
    allocations = allocations_from_report(heart_report, "run1")
    assert [a.method for a in allocations] == ["least_core@run1", "shapley@run1"]
    assert allocations[1].phi == pytest.approx((0.178583, 0.249983, 0.428533), abs=1e-6)

    del heart_report["methods"]["shapley"]["phi"]["b"]
    with pytest.raises(ReportFormatError):
        allocations_from_report(heart_report)


def test_payoff_frame_and_aggregate(heart_report, other_report):
    frame = payoff_frame([heart_report, other_report], ["x", "y"])
    assert frame.columns == ["run", "method", "player", "player_index", "payoff"]
    assert frame.height == 12

    summary = aggregate_payoffs(frame)
    assert summary.columns == ["method", "player", "mean", "std", "min", "max", "count"]
    assert summary["method"].to_list() == ["least_core"] * 3 + ["shapley"] * 3
    assert summary["player"].to_list() == ["a", "b", "c"] * 2
    assert summary["count"].to_list() == [2] * 6
    first = summary.row(3, named=True)
    values = [heart_report["methods"]["shapley"]["phi"]["a"]]
    values.append(other_report["methods"]["shapley"]["phi"]["a"])
    assert first["mean"] == pytest.approx(sum(values) / 2)
    assert first["min"] == min(values)


def test_compare_reports(heart_report, other_report):
    result = compare_reports([heart_report, other_report], ["full", "edited"])
    assert result["inputs"] == ["full", "edited"]
    assert list(result["methods"]) == [
        "least_core@edited",
        "least_core@full",
        "shapley@edited",
        "shapley@full",
    ]
    assert len(result["comparison"]) == 6
    (delta,) = result["delta_e_star"]
    assert (delta["left"], delta["right"]) == ("full", "edited")
    assert delta["delta"] == pytest.approx(
        heart_report["methods"]["least_core"]["e_star"]
        - other_report["methods"]["least_core"]["e_star"]
    )
    assert len(result["aggregate"]) == 6


def test_compare_reports_without_least_core(heart_report, other_report):
    del heart_report["methods"]["least_core"]
    result = compare_reports([heart_report, other_report], ["a", "b"])
    assert result["e_star"]["a"] is None
    assert result["delta_e_star"] == []


def test_compare_reports_rejects_bad_inputs(heart_report, other_report):
    with pytest.raises(InputError):
        compare_reports([heart_report], ["only"])

    other_report["players"] = ["x", "y", "z"]
    with pytest.raises(MismatchedGames):
        compare_reports([heart_report, other_report], ["a", "b"])


def test_compare_reports_rejects_different_grand_values(heart_report, other_report):
    for entry in other_report["methods"].values():
        entry["phi"] = {name: 2 * value for name, value in entry["phi"].items()}
    with pytest.raises(MismatchedGames):
        compare_reports([heart_report, other_report], ["a", "b"])


def test_render_report_table(heart_report):
    text = render_report_table(heart_report)
    header = text.splitlines()[0]
    assert header == "v(D) = 0.857100  evaluated = 6  t1 = 0, t2 = 0  e* = 0.357133"
    assert "0.142867" in text
    assert "binding: {a}; {b}; {c}" in text
    assert "near binding" not in text
    assert "least_core" in text and "shapley" in text


def test_render_comparison_table(heart_report, other_report):
    text = render_comparison_table(
        compare_reports([heart_report, other_report], ["full", "edited"])
    )
    assert text.startswith("inputs: full, edited")
    assert "least_core@full" in text
    assert "delta" in text
