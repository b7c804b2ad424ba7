"""Checkpoint files: magic bytes, then a torch-serialised record of the format version, digest and parameters."""

import io
import warnings
from pathlib import Path
from typing import Any, Optional

import torch

from waypointnav.common.common import get_version
from waypointnav.common.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from waypointnav.common.exceptions import DigestMismatchError, ParseError
from waypointnav.modules.policy.network import PolicyConfig, WaypointPolicy


def save_checkpoint(path: Path, policy: WaypointPolicy, extra: Optional[dict[str, Any]] = None) -> None:
    """
    Write `policy` to `path` along with an `extra` dictionary of training state.

    Args:
        path: The checkpoint file to (over)write.
        policy: The policy whose configuration and parameters are saved.
        extra: Anything else torch can serialise, e.g. optimizer state and counters.
    """
    record = {
        "version": CHECKPOINT_VERSION,
        "tool_version": get_version(),
        "digest": policy.config.digest(),
        "config": policy.config.to_dict(),
        "state_dict": {k: v.detach().clone() for k, v in policy.state_dict().items()},
        "extra": extra or {},
    }
    buffer = io.BytesIO()
    torch.save(record, buffer)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(buffer.getvalue())


def read_checkpoint(path: Path) -> dict[str, Any]:
    """
    Raises:
        FileNotFoundError: If `path` does not exist.
        ParseError: If the file is not a checkpoint or has an unsupported format version.
    """
    with open(path, "rb") as f:
        magic = f.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ParseError(f"{path} is not a waypointnav checkpoint", 1)
        record = torch.load(io.BytesIO(f.read()), weights_only=False)
    if record.get("version") != CHECKPOINT_VERSION:
        raise ParseError(f"Unsupported checkpoint format version {record.get('version')}", 1)
    return record


def load_checkpoint(
    path: Path, expected_digest: Optional[str] = None, allow_mismatch: bool = False
) -> tuple[WaypointPolicy, dict[str, Any]]:
    """
    Rebuild the policy saved at `path`.

    Args:
        path: The checkpoint file.
        expected_digest: The digest of the configuration the caller intends to use the policy under, if any.
        allow_mismatch: Load anyway, with a warning, when a digest does not match.

    Returns:
        The policy and the checkpoint's extra training state.

    Raises:
        DigestMismatchError: If the stored digest does not match the stored configuration or `expected_digest`,
            unless `allow_mismatch` is set.
    """
    record = read_checkpoint(path)
    config = PolicyConfig(**record["config"])
    problems = []
    if config.digest() != record["digest"]:
        problems.append(f"the stored digest {record['digest'][:12]} does not match its configuration")
    if expected_digest is not None and record["digest"] != expected_digest:
        problems.append(f"the checkpoint digest {record['digest'][:12]} does not match {expected_digest[:12]}")
    if problems:
        message = f"Checkpoint {path}: " + "; ".join(problems)
        if not allow_mismatch:
            raise DigestMismatchError(message + ", pass --allow-digest-mismatch to load it anyway")
        warnings.warn(message, UserWarning)
    policy = WaypointPolicy(config)
    policy.load_state_dict(record["state_dict"])
    return policy, record["extra"]
