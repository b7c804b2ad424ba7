import math

import pandas as pd
import pytest

import waypointnav.common.io as io
from waypointnav.common.constants import REPORT_COLUMNS
from waypointnav.common.exceptions import ParseError
from waypointnav.modules.evaluation.evaluate import (
    OracleJob,
    evaluate_checkpoint,
    evaluation_digest,
    oracle_times,
    result_from_json,
    result_to_json,
)
from waypointnav.modules.evaluation.io import (
    RESULTS_CSV,
    RESULTS_LOG,
    SUMMARY,
    check_output_paths,
    read_results_log,
    write_evaluation_outputs,
)
from waypointnav.modules.metrics.motion import MotionModel

MODEL = MotionModel()


@pytest.fixture
def triples(small_world):
    grid, episodes = small_world
    return [(3, grid, e) for e in episodes]


def frame(reports) -> pd.DataFrame:
    return pd.DataFrame([r.as_row() for r in reports])


def test_evaluation_is_deterministic(small_policy, triples) -> None:
    results, reports = evaluate_checkpoint(small_policy, triples, "cn", MODEL, step_cap=4)
    again, reports_again = evaluate_checkpoint(small_policy, triples, "cn", MODEL, step_cap=4)
    assert [r.path for r in results] == [r.path for r in again]
    assert frame(reports).equals(frame(reports_again))
    assert [r.episode_id for r in reports] == [e.id for _, _, e in triples]
    assert all(math.isnan(r.SCT) for r in reports)
    assert all(1 <= r.decision_count <= 4 for r in reports)


def test_lattice_oracle_scores_sct(small_policy, triples) -> None:
    _, reports = evaluate_checkpoint(small_policy, triples, "dn", MODEL, step_cap=4, oracle="lattice")
    for report in reports:
        assert 0.0 <= report.SCT <= 1.0 + 1e-9
        if not report.SR:
            assert report.SCT == 0.0


def test_unknown_oracle(small_policy, triples) -> None:
    with pytest.raises(ValueError, match="Unknown oracle"):
        evaluate_checkpoint(small_policy, triples, "cn", MODEL, oracle="astar")


def test_an_empty_set_evaluates_to_nothing(small_policy) -> None:
    assert evaluate_checkpoint(small_policy, [], "cn", MODEL) == ([], [])


def test_oracle_pool_keeps_job_order(small_world) -> None:
    grid, episodes = small_world
    jobs = [OracleJob(grid, e.start, e.goal, MODEL, "lattice", 0) for e in episodes]
    serial = oracle_times(jobs)
    assert oracle_times(jobs, workers=2) == serial
    assert all(0.0 < t < math.inf for t in serial)


def test_evaluation_digest_depends_on_navigator_and_model() -> None:
    digest = evaluation_digest("abc", "cn", MODEL)
    assert digest == evaluation_digest("abc", "cn", MotionModel())
    assert digest != evaluation_digest("abc", "dn", MODEL)
    assert digest != evaluation_digest("abc", "cn", MotionModel(b1=5.0))


def test_logged_episodes_keep_what_render_needs(small_policy, triples) -> None:
    results, _ = evaluate_checkpoint(small_policy, triples[:1], "cn", MODEL, step_cap=3)
    logged = result_from_json(result_to_json(results[0], 3), 1)
    assert logged.id == results[0].episode.id
    assert logged.world_seed == 3
    assert logged.path == tuple(tuple(p) for p in results[0].path)
    assert len(logged.decision_poses) == len(results[0].decisions)
    assert logged.start == results[0].episode.start


@pytest.mark.parametrize("text", ["not json", "{}", '{"id": "x", "world_seed": "three"}', "[]"])
def test_malformed_records(text) -> None:
    with pytest.raises(ParseError, match="line 4: malformed evaluation record"):
        result_from_json(text, 4)


def test_outputs_and_log(tmp_path, small_policy, triples) -> None:
    results, reports = evaluate_checkpoint(small_policy, triples, "cn", MODEL, step_cap=3)
    check_output_paths(tmp_path / "eval_cn", force=False)
    write_evaluation_outputs(results, reports, [3] * len(results), {"label": "CC"}, "d1g", tmp_path / "eval_cn")

    table, provenance = io.read_csv(tmp_path / "eval_cn" / RESULTS_CSV)
    assert list(table.columns) == ["episode_id", *REPORT_COLUMNS, "decision_count"]
    assert len(table) == len(triples)
    assert provenance["digest"] == "d1g"
    assert io.read_json(tmp_path / "eval_cn" / SUMMARY)["label"] == "CC"
    assert [e.id for e in read_results_log(tmp_path / "eval_cn" / RESULTS_LOG)] == [e.id for _, _, e in triples]

    with pytest.raises(FileExistsError, match="pass --force"):
        check_output_paths(tmp_path / "eval_cn", force=False)
    check_output_paths(tmp_path / "eval_cn", force=True)


def test_empty_evaluation_writes_a_header_only_table(tmp_path) -> None:
    write_evaluation_outputs([], [], [], {"aggregate": {}}, "d1g", tmp_path)
    table, _ = io.read_csv(tmp_path / RESULTS_CSV)
    assert table.empty
    assert list(table.columns) == ["episode_id", *REPORT_COLUMNS, "decision_count"]
    assert (tmp_path / RESULTS_LOG).read_text() == ""


def test_results_log_errors_carry_line_numbers(tmp_path, small_policy, triples) -> None:
    results, _ = evaluate_checkpoint(small_policy, triples[:1], "cn", MODEL, step_cap=2)
    path = tmp_path / RESULTS_LOG
    path.write_text(result_to_json(results[0], 3) + "\n\n{broken\n")
    with pytest.raises(ParseError, match="line 3"):
        read_results_log(path)
    with pytest.raises(FileNotFoundError):
        read_results_log(tmp_path / "missing.jsonl")
