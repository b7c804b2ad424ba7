import math

import pytest

import waypointnav.common.io as io
from waypointnav.modules.evaluation.compare import TABLE_COLUMNS, compare_table, load_summaries


def summary(label: str, navigator: str, commands: float, sr: float = 0.5) -> dict:
    aggregate = {
        "TL": 3.0,
        "NE": 0.4,
        "OS": 0.75,
        "SR": sr,
        "SPL": 0.4,
        "EET": 60.0,
        "SCT": 0.3,
        "n_commands": commands,
        "decision_count": 4.0,
        "speed": 0.05,
    }
    return {"label": label, "navigator": navigator, "aggregate": aggregate, "digest": label + navigator}


def test_compare_table() -> None:
    table = compare_table([summary("DD", "dn", 20.0), summary("CC", "cn", 5.0, sr=0.6)])
    assert list(table.columns) == TABLE_COLUMNS
    assert table["config"].tolist() == ["DD", "CC"]
    assert table["SR"].tolist() == pytest.approx([50.0, 60.0])
    assert table["OS"].iloc[0] == pytest.approx(75.0)
    assert table["TL"].iloc[0] == 3.0
    assert table["command_ratio"].tolist() == pytest.approx([1.0, 0.25])


def test_runs_without_episodes_compare_as_nan() -> None:
    table = compare_table([{"label": "CC", "navigator": "cn", "aggregate": {}}])
    assert math.isnan(table["SPL"].iloc[0])
    assert compare_table([]).empty


def test_missing_summaries_are_skipped_with_a_warning(tmp_path) -> None:
    (tmp_path / "a").mkdir()
    io.write_json(summary("CC", "cn", 5.0), tmp_path / "a" / "summary.json")
    with pytest.warns(UserWarning, match="No evaluation summary"):
        summaries = load_summaries([tmp_path / "a", tmp_path / "b"])
    assert [s["label"] for s in summaries] == ["CC"]
