"""Common building-block functions for handling module input and output."""

import hashlib
import json
import os
import warnings
from pathlib import Path
from typing import Any, Optional, Union

import pandas as pd

from waypointnav.common.common import get_version
from waypointnav.common.constants import DEFAULT_OUTPUT_ROOT, OUTPUT_ROOT_ENV


def output_root() -> Path:
    """The default directory under which experiment directories are created."""
    return Path(os.environ.get(OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT))


def experiment_io(experiment_name: str, dir_experiments: Optional[Union[str, Path]] = None) -> Path:
    """
    Create an experiment's directory and return the path.

    Args:
        experiment_name: The name of the experiment.
        dir_experiments: The directory containing all experiments, defaults to `$WAYPOINTNAV_OUT` or `experiments`.

    Returns:
        The path to the experiment directory.
    """
    dir_experiment = Path(dir_experiments if dir_experiments is not None else output_root()) / experiment_name
    dir_experiment.mkdir(parents=True, exist_ok=True)
    return dir_experiment


def resolve_experiment_dir(args: Any) -> Path:
    """The experiment directory for a run: `--out` when given, else `<output root>/<experiment name>`."""
    if getattr(args, "out", None):
        dir_experiment = Path(args.out)
        dir_experiment.mkdir(parents=True, exist_ok=True)
        return dir_experiment
    return experiment_io(args.experiment_name)


def consistent_ending(fn: str, ending: str = ".txt", suffix: str = "") -> str:
    """
    Ensures that the filename `fn` ends with `ending`, replacing any existing ending and optionally
    inserting `suffix` before it.

    Examples:
        >>> consistent_ending("results", ".csv", "dn")
        'results_dn.csv'
    """
    path_fn = Path(fn)
    return str(path_fn.parent / path_fn.stem) + ("_" if suffix else "") + suffix + ending


def check_exists(fns: list[str], dir: Path) -> None:
    """
    Checks if the files in `fns` exist in `dir`.

    Raises:
        FileNotFoundError: If any of the files in `fns` do not exist in `dir`.
    """
    for fn in fns:
        if not (Path(dir) / fn).exists():
            raise FileNotFoundError(f"File {fn} does not exist at {dir}.")


def warn_if_path_supplied(fns: list[str], dir: Path) -> None:
    """
    Warns if the files in `fns` include directory separators, as they are resolved relative to `dir`.
    """
    for fn in fns:
        if "/" in str(fn):
            warnings.warn(
                f"Using the path supplied appended to {dir}, i.e. attempting to read data from {Path(dir) / fn}",
                UserWarning,
            )


def guard_overwrite(paths: list[Path], force: bool) -> None:
    """
    Refuse to overwrite existing outputs unless `force` is set.

    Raises:
        FileExistsError: If any of `paths` exists and `force` is not set.
    """
    existing = [str(p) for p in paths if Path(p).exists()]
    if existing and not force:
        raise FileExistsError(f"Refusing to overwrite {existing[:3]}{'...' if len(existing) > 3 else ''}, pass --force")


def canonical_json(obj: Any) -> str:
    """Serialise `obj` with sorted keys and no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_digest(config: dict[str, Any]) -> str:
    """
    SHA-256 of the canonical JSON of a config (sub)dictionary; this is embedded in every output artifact.

    Examples:
        >>> config_digest({"b": 1, "a": 2}) == config_digest({"a": 2, "b": 1})
        True
    """
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def provenance(digest: str) -> dict[str, str]:
    """The provenance fields stamped onto every artifact."""
    return {"digest": digest, "version": get_version()}


def write_json(obj: Any, path: Path) -> None:
    """Write `obj` as indented JSON with sorted keys, so that reruns are byte-identical."""
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: Path) -> Any:
    with open(path) as f:
        return json.load(f)


def write_csv(frame: pd.DataFrame, path: Path, digest: str) -> None:
    """Write `frame` as CSV under a leading `#` comment line carrying the digest and tool version."""
    with open(path, "w", newline="") as f:
        f.write(f"# digest={digest} version={get_version()}\n")
        frame.to_csv(f, index=False, lineterminator="\n")


def read_csv(path: Path) -> tuple[pd.DataFrame, dict[str, str]]:
    """Read a CSV written by `write_csv`, returning the table and its provenance fields."""
    with open(path) as f:
        first = f.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path} has no provenance line")
        fields = dict(item.split("=", 1) for item in first[1:].split())
        frame = pd.read_csv(f)
    return frame, fields
