"""What the policy sees at each decision, singly and stacked into padded batches."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import torch

from waypointnav.common.constants import N_SECTORS


@dataclass(frozen=True)
class Observation:
    """
    Args:
        ranges: The twelve sector range readings in meters, sector 0 straight ahead, counter-clockwise.
        tokens: The instruction's token ids.
        goal_hint: Optional (12, 2) array, per sector whether the goal bearing lies in it and the straight-line
            goal distance scaled by the maximum range in that sector's slot.
    """

    ranges: tuple[float, ...]
    tokens: tuple[int, ...]
    goal_hint: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self) -> None:
        if len(self.ranges) != N_SECTORS:
            raise ValueError(f"Expected {N_SECTORS} range readings, got {len(self.ranges)}")
        if not self.tokens:
            raise ValueError("The instruction must contain at least one token")


@dataclass
class ObservationBatch:
    ranges: torch.Tensor
    tokens: torch.Tensor
    mask: torch.Tensor
    goal_hint: torch.Tensor

    def __len__(self) -> int:
        return len(self.ranges)

    def __getitem__(self, index: torch.Tensor) -> "ObservationBatch":
        return ObservationBatch(self.ranges[index], self.tokens[index], self.mask[index], self.goal_hint[index])

    @classmethod
    def stack(cls, observations: Sequence[Observation]) -> "ObservationBatch":
        """Stack `observations`, right-padding the instructions with token 0 and masking the padding out."""
        length = max(len(o.tokens) for o in observations)
        tokens = np.zeros((len(observations), length), dtype=np.int64)
        mask = np.zeros((len(observations), length), dtype=bool)
        hints = np.zeros((len(observations), N_SECTORS, 2))
        for i, o in enumerate(observations):
            tokens[i, : len(o.tokens)] = o.tokens
            mask[i, : len(o.tokens)] = True
            if o.goal_hint is not None:
                hints[i] = o.goal_hint
        return cls(
            torch.tensor(np.array([o.ranges for o in observations]), dtype=torch.float64),
            torch.from_numpy(tokens),
            torch.from_numpy(mask),
            torch.from_numpy(hints),
        )
