import argparse
from pathlib import Path
from typing import Any, Optional

import pandas as pd

import waypointnav.common.io as io
from waypointnav.modules.policy.io import load_checkpoint
from waypointnav.modules.policy.network import PolicyConfig, WaypointPolicy

CHECKPOINTS_DIR = "checkpoints"


def checkpoint_path(dir_experiment: Path, name: str = "best") -> Path:
    return dir_experiment / CHECKPOINTS_DIR / io.consistent_ending(name, ".pt")


def check_output_paths(args: argparse.Namespace, dir_experiment: Path) -> Path:
    """
    Sets up the checkpoint directory, refusing to replace an earlier run's checkpoints unless resuming or forced.

    Raises:
        FileExistsError: If checkpoints exist and neither `--resume` nor `--force` was given.
    """
    dir_checkpoints = dir_experiment / CHECKPOINTS_DIR
    if not args.resume:
        io.guard_overwrite([checkpoint_path(dir_experiment, n) for n in ("best", "latest")], args.force)
    dir_checkpoints.mkdir(parents=True, exist_ok=True)
    return dir_checkpoints


def load_resume_state(
    args: argparse.Namespace, dir_experiment: Path, config: PolicyConfig
) -> tuple[Optional[WaypointPolicy], Optional[dict[str, Any]]]:
    """The policy and training state of the latest checkpoint when `--resume` is set, else `(None, None)`."""
    if not args.resume:
        return None, None
    path = checkpoint_path(dir_experiment, "latest")
    io.check_exists([path.name], path.parent)
    return load_checkpoint(path, config.digest(), args.allow_digest_mismatch)


def write_training_outputs(
    log: pd.DataFrame, summary: dict[str, Any], digest: str, dir_experiment: Path, args: argparse.Namespace
) -> None:
    fn_log = io.consistent_ending(args.training_log, ".csv")
    io.warn_if_path_supplied([fn_log], dir_experiment)
    io.write_csv(log, dir_experiment / fn_log, digest)
    io.write_json({**summary, **io.provenance(digest)}, dir_experiment / "train_summary.json")
