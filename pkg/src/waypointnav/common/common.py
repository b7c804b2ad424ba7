"""Common functions for all modules."""

import random
from importlib.metadata import PackageNotFoundError
from importlib.metadata import version as ver
from typing import Optional

import numpy as np
import torch


def set_seed(seed: Optional[int] = None) -> None:
    """
    (Potentially) set the seed for numpy, torch and random. If no seed is provided, nothing happens.

    Args:
        seed: The seed to set.
    """
    if seed is not None:
        np.random.seed(seed)
        torch.manual_seed(seed)
        random.seed(seed)


def derive_seed(seed: int, *keys: int) -> int:
    """
    Deterministically derive a child seed from a parent `seed` and a sequence of integer `keys`
    (e.g. an environment index), such that distinct keys give statistically independent streams.

    Args:
        seed: The parent seed.
        keys: Integers identifying the child stream.

    Returns:
        A non-negative 63-bit integer seed.

    Examples:
        >>> derive_seed(1, 0) == derive_seed(1, 0)
        True
        >>> derive_seed(1, 0) == derive_seed(1, 1)
        False
    """
    state = np.random.SeedSequence([seed, *keys]).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1])) & ((1 << 63) - 1)


def numpy_rng(seed: int, *keys: int) -> np.random.Generator:
    """A `numpy.random.Generator` for the stream identified by `seed` and `keys`."""
    return np.random.default_rng(derive_seed(seed, *keys))


def torch_rng(seed: int, *keys: int) -> torch.Generator:
    """A CPU `torch.Generator` for the stream identified by `seed` and `keys`."""
    generator = torch.Generator()
    generator.manual_seed(derive_seed(seed, *keys))
    return generator


def get_version() -> str:
    """The installed version of the package, or a placeholder when running from a source tree."""
    try:
        return ver("waypointnav")
    except PackageNotFoundError:
        return "0+unknown"
