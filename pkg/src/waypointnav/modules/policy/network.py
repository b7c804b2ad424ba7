"""
The waypoint policy: per-sector scan features, an instruction embedding attended from the visual history, a
second recurrence over the action history, and the pano, offset, distance and value heads.
"""

import argparse
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import torch
import torch.nn as nn

from waypointnav.common.constants import N_SECTORS, SECTOR_WIDTH
from waypointnav.common.io import config_digest
from waypointnav.modules.actionspace.heads import (
    DISTANCE,
    OFFSET,
    ActionBatch,
    ExpressivityConfig,
    HeadOutputs,
    WaypointDistribution,
)
from waypointnav.modules.policy.autodiff import concat, matmul, mean_pool, mul
from waypointnav.modules.policy.layers import GRUCell, Linear, SectorEncoder, attention, concat_broadcast
from waypointnav.modules.policy.observations import ObservationBatch
from waypointnav.modules.world.instructions import VOCABULARY

PREV_ACTION_DIM = 4


@dataclass(frozen=True)
class PolicyConfig:
    """Architecture, expressivity and observation options of a `WaypointPolicy`; all of them enter its digest."""

    vocab_size: int = len(VOCABULARY)
    sector_dim: int = 32
    h_vis_dim: int = 64
    h_a_dim: int = 64
    embedding_dim: int = 16
    expressivity: str = "cc"
    use_pose_features: bool = True
    use_goal_hint: bool = False
    max_range: float = 10.0

    def __post_init__(self) -> None:
        ExpressivityConfig.from_preset(self.expressivity)
        for f in ("vocab_size", "sector_dim", "h_vis_dim", "h_a_dim", "embedding_dim"):
            if getattr(self, f) < 1:
                raise ValueError(f"`{f}` must be positive, got {getattr(self, f)}")

    @property
    def expressivity_config(self) -> ExpressivityConfig:
        return ExpressivityConfig.from_preset(self.expressivity)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "PolicyConfig":
        return cls(**{f.name: getattr(args, f.name) for f in fields(cls) if getattr(args, f.name, None) is not None})

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        return config_digest(
            {
                "policy": {k: v for k, v in self.to_dict().items() if k.endswith("_dim") or k == "vocab_size"},
                "expressivity": self.expressivity,
                "observation": {
                    "use_pose_features": self.use_pose_features,
                    "use_goal_hint": self.use_goal_hint,
                    "max_range": self.max_range,
                },
            }
        )


@dataclass
class PolicyState:
    """Recurrent state carried between decisions, one row per environment; zeros at the start of an episode."""

    h_vis: torch.Tensor
    h_a: torch.Tensor
    prev_action: torch.Tensor
    prev_sector_feature: torch.Tensor

    @classmethod
    def zeros(cls, batch: int, config: PolicyConfig) -> "PolicyState":
        def z(dim: int) -> torch.Tensor:
            return torch.zeros(batch, dim, dtype=torch.float64)

        return cls(z(config.h_vis_dim), z(config.h_a_dim), z(PREV_ACTION_DIM), z(config.sector_dim))

    def __len__(self) -> int:
        return len(self.h_vis)

    def __getitem__(self, index) -> "PolicyState":
        return PolicyState(*(getattr(self, f.name)[index] for f in fields(self)))

    @classmethod
    def cat(cls, states: Sequence["PolicyState"]) -> "PolicyState":
        return cls(*(torch.cat([getattr(s, f.name) for s in states]) for f in fields(cls)))

    def reset(self, done: torch.Tensor) -> "PolicyState":
        """Zero the rows of finished episodes."""
        keep = (~done).to(torch.float64)[:, None]
        return PolicyState(*(getattr(self, f.name) * keep for f in fields(self)))


@dataclass
class PolicyOutput:
    heads: HeadOutputs
    value: torch.Tensor
    h_vis: torch.Tensor
    h_a: torch.Tensor
    sector_features: torch.Tensor

    @property
    def distribution(self) -> WaypointDistribution:
        return WaypointDistribution(self.heads)


class WaypointPolicy(nn.Module):
    """
    The policy network in double precision. Each sector's input is its scaled range reading, the sine and cosine
    of its angle relative to the agent (zeros when pose features are disabled), the previously chosen sector's
    feature and, optionally, the goal hint; one perceptron with shared weights encodes every sector.

    Args:
        config: The network configuration.
    """

    def __init__(self, config: Optional[PolicyConfig] = None) -> None:
        super().__init__()
        self.config = config or PolicyConfig()
        c = self.config
        expressivity = c.expressivity_config
        sector_in = 3 + c.sector_dim + (2 if c.use_goal_hint else 0)
        self.sector_encoder = SectorEncoder(sector_in, c.sector_dim)
        self.embedding = nn.Parameter(torch.randn(c.vocab_size, c.embedding_dim, dtype=torch.float64) * 0.1)
        self.gru_vis = GRUCell(c.sector_dim + PREV_ACTION_DIM + c.embedding_dim, c.h_vis_dim)
        self.instruction_query = Linear(c.h_vis_dim, c.embedding_dim)
        self.pano_query = Linear(c.h_vis_dim + c.embedding_dim, c.sector_dim)
        self.gru_a = GRUCell(c.sector_dim + c.embedding_dim + PREV_ACTION_DIM + c.sector_dim, c.h_a_dim)
        self.pano_key = Linear(c.h_a_dim, c.sector_dim)
        self.stop_head = Linear(c.h_a_dim, 1)
        width_offset, width_distance = expressivity.width(OFFSET), expressivity.width(DISTANCE)
        self.offset_head = Linear(c.sector_dim + c.h_a_dim, width_offset) if width_offset else None
        self.distance_head = Linear(c.sector_dim + c.h_a_dim, width_distance) if width_distance else None
        self.value_head = Linear(c.h_a_dim, 1)
        angles = torch.arange(N_SECTORS, dtype=torch.float64) * SECTOR_WIDTH
        pose = torch.stack([torch.sin(angles), torch.cos(angles)], dim=-1)
        self.register_buffer("pose_features", pose if c.use_pose_features else torch.zeros_like(pose))

    @classmethod
    def get_args(cls) -> list[str]:
        return [f.name for f in fields(PolicyConfig)]

    def _check_tokens(self, obs: ObservationBatch) -> None:
        if not bool(obs.mask.any(dim=-1).all()):
            raise ValueError("Every instruction must contain at least one token")
        used = obs.tokens[obs.mask]
        if bool(((used < 0) | (used >= self.config.vocab_size)).any()):
            bad = int(used[(used < 0) | (used >= self.config.vocab_size)][0])
            raise ValueError(f"Token id {bad} is out of the vocabulary of size {self.config.vocab_size}")

    def forward(self, obs: ObservationBatch, state: PolicyState) -> PolicyOutput:
        """
        Raises:
            ValueError: If an instruction is empty or holds a token id outside the vocabulary.
            NumericError: If a head produces a non-finite value.
        """
        self._check_tokens(obs)
        c = self.config
        batch = len(obs)
        ranges = (obs.ranges / c.max_range).unsqueeze(-1)
        pose = self.pose_features.expand(batch, N_SECTORS, 2)
        parts = [ranges, pose, state.prev_sector_feature.unsqueeze(-2).expand(batch, N_SECTORS, c.sector_dim)]
        if c.use_goal_hint:
            parts.append(obs.goal_hint)
        sectors = self.sector_encoder(concat(parts, dim=-1))

        words = self.embedding[obs.tokens]
        mask = obs.mask.to(torch.float64)
        fill = (obs.tokens.shape[1] / mask.sum(dim=-1)).unsqueeze(-1)
        instruction = mul(mean_pool(mul(words, mask.unsqueeze(-1)), dim=1), fill)

        h_vis = self.gru_vis(concat([mean_pool(sectors, dim=1), state.prev_action, instruction]), state.h_vis)
        instruction_context = attention(words, self.instruction_query(h_vis), mask=obs.mask)
        visual_context = attention(sectors, self.pano_query(concat([h_vis, instruction_context])))
        h_a = self.gru_a(
            concat([visual_context, instruction_context, state.prev_action, state.prev_sector_feature]), state.h_a
        )

        sector_logits = matmul(sectors, self.pano_key(h_a).unsqueeze(-1)).squeeze(-1)
        pano_logits = concat([sector_logits, self.stop_head(h_a)])
        per_sector = concat_broadcast(sectors, h_a)
        heads = HeadOutputs(
            pano_logits,
            self.offset_head(per_sector) if self.offset_head is not None else None,
            self.distance_head(per_sector) if self.distance_head is not None else None,
            c.expressivity_config,
        )
        return PolicyOutput(heads, self.value_head(h_a).squeeze(-1), h_vis, h_a, sectors)

    def next_state(self, output: PolicyOutput, actions: ActionBatch) -> PolicyState:
        """The recurrent state after taking `actions`; STOP leaves zero action and sector features."""
        motion = (~actions.is_stop).to(torch.float64)
        sector = actions.pano.clamp(max=N_SECTORS - 1)
        angle = sector.to(torch.float64) * SECTOR_WIDTH
        prev_action = torch.stack(
            [actions.distance, torch.sin(angle), torch.cos(angle), actions.offset], dim=-1
        ) * motion.unsqueeze(-1)
        chosen = output.sector_features[torch.arange(len(actions)), sector] * motion.unsqueeze(-1)
        return PolicyState(output.h_vis.detach(), output.h_a.detach(), prev_action, chosen.detach())

    @torch.no_grad()
    def act(
        self,
        obs: ObservationBatch,
        state: PolicyState,
        generator: Optional[torch.Generator] = None,
        greedy: bool = False,
    ) -> tuple[ActionBatch, torch.Tensor, torch.Tensor, PolicyState]:
        """
        Choose one action per row, sampled from `generator` or the mode when `greedy`.

        Returns:
            The actions, their joint log-probabilities, the value estimates and the next recurrent state.
        """
        output = self(obs, state)
        distribution = output.distribution
        actions = distribution.mode() if greedy else distribution.sample(generator)
        return actions, distribution.log_prob(actions), output.value, self.next_state(output, actions)

    def evaluate_actions(
        self, obs: ObservationBatch, state: PolicyState, actions: ActionBatch
    ) -> tuple[torch.Tensor, torch.Tensor, tuple[torch.Tensor, torch.Tensor, torch.Tensor], torch.Tensor]:
        """Log-probabilities, values, decomposed entropies and offset magnitudes of stored decisions, with gradients."""
        output = self(obs, state)
        distribution = output.distribution
        return (
            distribution.log_prob(actions),
            output.value,
            distribution.entropy(),
            distribution.offset_magnitude(actions),
        )


def parameter_count(policy: nn.Module) -> int:
    return sum(math.prod(p.shape) for p in policy.parameters())
