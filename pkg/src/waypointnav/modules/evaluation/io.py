import argparse
from pathlib import Path
from typing import Any, Sequence

import pandas as pd

import waypointnav.common.io as io
from waypointnav.common.constants import REPORT_COLUMNS
from waypointnav.modules.evaluation.evaluate import LoggedEpisode, result_from_json, result_to_json
from waypointnav.modules.metrics.vln import EpisodeResult, MetricsReport

RESULTS_CSV = "results.csv"
RESULTS_LOG = "results.jsonl"
SUMMARY = "summary.json"


def evaluation_dir(args: argparse.Namespace, dir_experiment: Path) -> Path:
    """Where an evaluation's outputs go: `--evaluation-name` under the experiment, by default `eval_<navigator>`."""
    name = args.evaluation_name or f"eval_{args.navigator}"
    io.warn_if_path_supplied([name], dir_experiment)
    return dir_experiment / name


def check_output_paths(dir_evaluation: Path, force: bool) -> None:
    """
    Raises:
        FileExistsError: If an earlier evaluation's outputs exist and `force` is not set.
    """
    io.guard_overwrite([dir_evaluation / fn for fn in (RESULTS_CSV, RESULTS_LOG, SUMMARY)], force)
    dir_evaluation.mkdir(parents=True, exist_ok=True)


def checkpoint_location(args: argparse.Namespace, dir_experiment: Path) -> Path:
    """
    The checkpoint to evaluate: the one handed over by `train` in the same pipeline, else `--checkpoint` relative
    to the experiment directory.

    Raises:
        FileNotFoundError: If the checkpoint does not exist.
    """
    if "checkpoint" in args.module_handover:
        return Path(args.module_handover["checkpoint"])
    fn_checkpoint = io.consistent_ending(args.checkpoint, ".pt")
    io.warn_if_path_supplied([fn_checkpoint], dir_experiment)
    io.check_exists([fn_checkpoint], dir_experiment)
    return dir_experiment / fn_checkpoint


def write_evaluation_outputs(
    results: Sequence[EpisodeResult],
    reports: Sequence[MetricsReport],
    world_seeds: Sequence[int],
    summary: dict[str, Any],
    digest: str,
    dir_evaluation: Path,
) -> None:
    """Per-episode metrics as CSV, the episode log as JSON lines and the aggregate summary as JSON."""
    columns = ["episode_id", *REPORT_COLUMNS, "decision_count"]
    table = pd.DataFrame([r.as_row() for r in reports], columns=columns)
    io.write_csv(table, dir_evaluation / RESULTS_CSV, digest)
    with open(dir_evaluation / RESULTS_LOG, "w") as f:
        f.writelines(result_to_json(r, s) + "\n" for r, s in zip(results, world_seeds))
    io.write_json({**summary, **io.provenance(digest)}, dir_evaluation / SUMMARY)


def read_results_log(path: Path) -> list[LoggedEpisode]:
    """
    Raises:
        FileNotFoundError: If `path` does not exist.
        ParseError: If a line is malformed, carrying its line number.
    """
    with open(path) as f:
        return [result_from_json(text, n) for n, text in enumerate(f.read().splitlines(), start=1) if text.strip()]
