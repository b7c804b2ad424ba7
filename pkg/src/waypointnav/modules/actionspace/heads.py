"""
The waypoint action space. A waypoint is a pano sector (or STOP), a heading offset within the sector and a
distance; each of the offset and distance components is continuous, discrete or fixed depending on the
expressivity configuration.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import torch

from waypointnav.common.constants import (
    DISCRETE_DISTANCES,
    DISCRETE_OFFSETS,
    DISTANCE_BOUNDS,
    EXPRESSIVITY_PRESETS,
    FIXED_DISTANCE,
    FIXED_OFFSET,
    N_SECTORS,
    OFFSET_BOUND,
    SECTOR_WIDTH,
    SIGMA_FLOOR,
    STOP,
)
from waypointnav.common.exceptions import NotAMotionError, NumericError
from waypointnav.common.strings import expressivity_label, preset_name
from waypointnav.modules.actionspace.distributions import (
    TruncatedGaussian,
    categorical_entropy,
    categorical_sample,
)

MODES = ("continuous", "discrete", "fixed")
N_PANO = N_SECTORS + 1
ATOL = 1e-9


def _as_float64(t: torch.Tensor) -> torch.Tensor:
    return torch.as_tensor(t, dtype=torch.float64)


def _check_finite(*tensors: torch.Tensor) -> None:
    for t in tensors:
        if not bool(torch.isfinite(torch.as_tensor(t)).all()):
            raise NumericError("Non-finite raw head output")


def map_offset_head(raw_mean: torch.Tensor, raw_spread: torch.Tensor) -> TruncatedGaussian:
    """
    Offset head: mean = 15°·tanh(raw_mean), sigma = 15°·sigmoid(raw_spread) + 1e-3, bounded to [−15°, 15°].

    Raises:
        NumericError: If either raw value is not finite.
    """
    raw_mean, raw_spread = _as_float64(raw_mean), _as_float64(raw_spread)
    _check_finite(raw_mean, raw_spread)
    return TruncatedGaussian(
        OFFSET_BOUND * torch.tanh(raw_mean),
        OFFSET_BOUND * torch.sigmoid(raw_spread) + SIGMA_FLOOR,
        -OFFSET_BOUND,
        OFFSET_BOUND,
    )


def map_distance_head(raw_mean: torch.Tensor, raw_spread: torch.Tensor) -> TruncatedGaussian:
    """
    Distance head: mean = 0.25 + 3.75·sigmoid(raw_mean), sigma = 1.875·sigmoid(raw_spread) + 1e-3, bounded to
    [0.25 m, 4.0 m].

    Raises:
        NumericError: If either raw value is not finite.
    """
    raw_mean, raw_spread = _as_float64(raw_mean), _as_float64(raw_spread)
    _check_finite(raw_mean, raw_spread)
    low, high = DISTANCE_BOUNDS
    return TruncatedGaussian(
        low + (high - low) * torch.sigmoid(raw_mean),
        (high - low) / 2 * torch.sigmoid(raw_spread) + SIGMA_FLOOR,
        low,
        high,
    )


@dataclass(frozen=True)
class _Component:
    name: str
    atoms: tuple[float, ...]
    fixed: float
    bounds: tuple[float, float]
    mapper: Callable[[torch.Tensor, torch.Tensor], TruncatedGaussian]


OFFSET = _Component("offset", DISCRETE_OFFSETS, FIXED_OFFSET, (-OFFSET_BOUND, OFFSET_BOUND), map_offset_head)
DISTANCE = _Component("distance", DISCRETE_DISTANCES, FIXED_DISTANCE, DISTANCE_BOUNDS, map_distance_head)


@dataclass(frozen=True)
class ExpressivityConfig:
    """Which of the offset and distance components are continuous, discrete or fixed."""

    distance_mode: str = "continuous"
    offset_mode: str = "continuous"

    def __post_init__(self) -> None:
        for mode in (self.distance_mode, self.offset_mode):
            if mode not in MODES:
                raise ValueError(f"Unknown expressivity mode '{mode}', choose from {MODES}")

    @classmethod
    def from_preset(cls, name: str) -> "ExpressivityConfig":
        if name not in EXPRESSIVITY_PRESETS:
            raise ValueError(f"Unknown expressivity preset '{name}', choose from {list(EXPRESSIVITY_PRESETS)}")
        return cls(*EXPRESSIVITY_PRESETS[name])

    @property
    def label(self) -> str:
        return expressivity_label(self.distance_mode, self.offset_mode)

    @property
    def preset(self) -> str:
        return preset_name(self.distance_mode, self.offset_mode)

    def mode_of(self, component: _Component) -> str:
        return self.offset_mode if component is OFFSET else self.distance_mode

    def width(self, component: _Component) -> int:
        """Raw outputs per sector for `component`: mean and spread, one logit per atom, or none."""
        mode = self.mode_of(component)
        return {"continuous": 2, "discrete": len(component.atoms), "fixed": 0}[mode]


@dataclass(frozen=True)
class WaypointAction:
    """A pano sector (0..11) with an offset in radians and a distance in meters, or STOP with neither."""

    pano: int
    offset: Optional[float] = None
    distance: Optional[float] = None

    def __post_init__(self) -> None:
        if self.pano == STOP:
            if self.offset is not None or self.distance is not None:
                raise ValueError("STOP actions carry no offset or distance")
            return
        if not 0 <= self.pano < N_SECTORS:
            raise ValueError(f"pano must be a sector in [0, {N_SECTORS - 1}] or STOP ({STOP}), got {self.pano}")
        if self.offset is None or self.distance is None:
            raise ValueError("Motion actions need both an offset and a distance")
        if abs(self.offset) > OFFSET_BOUND + ATOL:
            raise ValueError(f"Offset {math.degrees(self.offset):.3f}° lies outside [−15°, 15°]")
        if not DISTANCE_BOUNDS[0] - ATOL <= self.distance <= DISTANCE_BOUNDS[1] + ATOL:
            raise ValueError(f"Distance {self.distance:.3f} m lies outside {list(DISTANCE_BOUNDS)}")

    @property
    def is_stop(self) -> bool:
        return self.pano == STOP


def compose_waypoint(action: WaypointAction) -> tuple[float, float]:
    """
    The relative polar waypoint (r, θ) of a motion action, with θ = 30°·pano + offset wrapped onto [0, 2π).

    Raises:
        NotAMotionError: If `action` is STOP.
    """
    if action.is_stop:
        raise NotAMotionError("STOP does not compose into a waypoint")
    bearing = math.fmod(action.pano * SECTOR_WIDTH + action.offset, 2 * math.pi)
    return action.distance, bearing + 2 * math.pi if bearing < 0 else bearing


@dataclass
class HeadOutputs:
    """
    Raw head outputs for a batch of decisions.

    Args:
        pano_logits: Shape (B, 13), twelve sectors then STOP.
        offset_raw: Shape (B, 12, w) with `w` given by `config.width(OFFSET)`, or `None` when the offset is fixed.
        distance_raw: As `offset_raw`, for the distance component.
        config: The expressivity configuration the heads were produced under.
    """

    pano_logits: torch.Tensor
    offset_raw: Optional[torch.Tensor]
    distance_raw: Optional[torch.Tensor]
    config: ExpressivityConfig

    def __post_init__(self) -> None:
        if self.pano_logits.dim() == 1:
            self.pano_logits = self.pano_logits.unsqueeze(0)
            self.offset_raw = None if self.offset_raw is None else self.offset_raw.unsqueeze(0)
            self.distance_raw = None if self.distance_raw is None else self.distance_raw.unsqueeze(0)
        if self.pano_logits.shape[-1] != N_PANO:
            raise ValueError(f"Expected {N_PANO} pano logits, got {self.pano_logits.shape[-1]}")
        for component, raw in ((OFFSET, self.offset_raw), (DISTANCE, self.distance_raw)):
            width = self.config.width(component)
            if (raw is None) != (width == 0) or (raw is not None and raw.shape[-2:] != (N_SECTORS, width)):
                shape = None if raw is None else tuple(raw.shape)
                raise ValueError(
                    f"The {component.name} head for {self.config.label} expects width {width}, got shape {shape}"
                )

    def raw(self, component: _Component) -> Optional[torch.Tensor]:
        return self.offset_raw if component is OFFSET else self.distance_raw


@dataclass
class ActionBatch:
    """
    A batch of sampled actions. STOP rows carry zero placeholders for offset and distance. `offset_u` holds the
    uniform variates behind continuous offsets so that they can be recomputed under new parameters.
    """

    pano: torch.Tensor
    offset: torch.Tensor
    distance: torch.Tensor
    offset_u: torch.Tensor

    def __len__(self) -> int:
        return len(self.pano)

    def __getitem__(self, index: torch.Tensor) -> "ActionBatch":
        return ActionBatch(self.pano[index], self.offset[index], self.distance[index], self.offset_u[index])

    @property
    def is_stop(self) -> torch.Tensor:
        return self.pano == STOP

    def to_actions(self) -> list[WaypointAction]:
        return [
            WaypointAction(STOP) if p == STOP else WaypointAction(int(p), float(o), float(d))
            for p, o, d in zip(self.pano.tolist(), self.offset.tolist(), self.distance.tolist())
        ]

    @classmethod
    def from_actions(
        cls, actions: Sequence[WaypointAction], offset_u: Optional[Sequence[float]] = None
    ) -> "ActionBatch":
        return cls(
            torch.tensor([a.pano for a in actions], dtype=torch.long),
            torch.tensor([0.0 if a.is_stop else a.offset for a in actions], dtype=torch.float64),
            torch.tensor([0.0 if a.is_stop else a.distance for a in actions], dtype=torch.float64),
            torch.tensor(offset_u if offset_u is not None else [0.5] * len(actions), dtype=torch.float64),
        )

    @classmethod
    def cat(cls, batches: Sequence["ActionBatch"]) -> "ActionBatch":
        return cls(*(torch.cat([getattr(b, f) for b in batches]) for f in ("pano", "offset", "distance", "offset_u")))


class WaypointDistribution:
    """
    The factorised joint policy Pano(θ^D)·Offset^(θ^D)(θ^off)·Dist^(θ^D)(r) over a batch of head outputs.
    Fixed components contribute a log-probability and entropy of zero.
    """

    def __init__(self, heads: HeadOutputs) -> None:
        _check_finite(heads.pano_logits)
        self.heads = heads
        self.config = heads.config
        self.pano_log_probs = torch.log_softmax(heads.pano_logits, dim=-1)

    def _chosen(self, raw: torch.Tensor, pano: torch.Tensor) -> torch.Tensor:
        sectors = pano.clamp(max=N_SECTORS - 1)
        return raw[torch.arange(len(pano)), sectors]

    def _component_log_prob(self, component: _Component, pano: torch.Tensor, value: torch.Tensor) -> torch.Tensor:
        mode = self.config.mode_of(component)
        if mode == "fixed":
            zero = torch.zeros_like(value)
            return torch.where((value - component.fixed).abs() <= ATOL, zero, zero - math.inf)
        raw = self._chosen(self.heads.raw(component), pano)
        if mode == "discrete":
            atoms = torch.tensor(component.atoms, dtype=torch.float64)
            index = (value[:, None] - atoms).abs().argmin(dim=-1)
            log_p = torch.log_softmax(raw, dim=-1).gather(-1, index[:, None]).squeeze(-1)
            return torch.where((atoms[index] - value).abs() <= ATOL, log_p, torch.full_like(log_p, -math.inf))
        return component.mapper(raw[:, 0], raw[:, 1]).log_prob(value)

    def log_prob(self, actions: ActionBatch) -> torch.Tensor:
        """Joint log-probability per row: log Pano alone for STOP, plus the chosen sector's heads otherwise."""
        log_pano = self.pano_log_probs.gather(-1, actions.pano[:, None]).squeeze(-1)
        log_heads = self._component_log_prob(OFFSET, actions.pano, actions.offset) + self._component_log_prob(
            DISTANCE, actions.pano, actions.distance
        )
        return log_pano + torch.where(actions.is_stop, torch.zeros_like(log_heads), log_heads)

    def _sector_entropies(self, component: _Component) -> torch.Tensor:
        mode = self.config.mode_of(component)
        if mode == "fixed":
            return torch.zeros(self.pano_log_probs.shape[:-1] + (N_SECTORS,), dtype=torch.float64)
        raw = self.heads.raw(component)
        if mode == "discrete":
            return categorical_entropy(raw)
        return component.mapper(raw[..., 0], raw[..., 1]).entropy()

    def entropy(self) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """
        Decomposed entropies (S_pano, S_offset, S_dist). The component entropies weight each sector's entropy by its
        Pano probability, so STOP mass contributes nothing and the three sum to the entropy of the joint action.
        """
        weights = torch.exp(self.pano_log_probs[..., :N_SECTORS])
        s_pano = categorical_entropy(self.heads.pano_logits)
        s_offset = (weights * self._sector_entropies(OFFSET)).sum(dim=-1)
        s_dist = (weights * self._sector_entropies(DISTANCE)).sum(dim=-1)
        return s_pano, s_offset, s_dist

    def _sample_component(
        self, component: _Component, pano: torch.Tensor, generator: Optional[torch.Generator]
    ) -> tuple[torch.Tensor, torch.Tensor]:
        mode = self.config.mode_of(component)
        u = torch.full(pano.shape, 0.5, dtype=torch.float64)
        if mode == "fixed":
            return torch.full(pano.shape, component.fixed, dtype=torch.float64), u
        raw = self._chosen(self.heads.raw(component), pano).detach()
        if mode == "discrete":
            index = categorical_sample(torch.softmax(raw, dim=-1), generator)
            return torch.tensor(component.atoms, dtype=torch.float64)[index], u
        dist = component.mapper(raw[:, 0], raw[:, 1])
        u = dist.uniforms(generator=generator)
        return dist.icdf(u), u

    def sample(self, generator: Optional[torch.Generator] = None) -> ActionBatch:
        """Draw one action per row, pano first, then offset, then distance, from the given stream."""
        with torch.no_grad():
            pano = categorical_sample(torch.exp(self.pano_log_probs), generator)
            offset, offset_u = self._sample_component(OFFSET, pano, generator)
            distance, _ = self._sample_component(DISTANCE, pano, generator)
        stop = pano == STOP
        return ActionBatch(pano, offset.masked_fill(stop, 0.0), distance.masked_fill(stop, 0.0), offset_u)

    def _mode_component(self, component: _Component, pano: torch.Tensor) -> torch.Tensor:
        mode = self.config.mode_of(component)
        if mode == "fixed":
            return torch.full(pano.shape, component.fixed, dtype=torch.float64)
        raw = self._chosen(self.heads.raw(component), pano).detach()
        if mode == "discrete":
            return torch.tensor(component.atoms, dtype=torch.float64)[raw.argmax(dim=-1)]
        return component.mapper(raw[:, 0], raw[:, 1]).mode

    def mode(self) -> ActionBatch:
        """The most likely action per row; ties between sectors or atoms go to the lowest index."""
        with torch.no_grad():
            pano = self.pano_log_probs.argmax(dim=-1)
            offset = self._mode_component(OFFSET, pano)
            distance = self._mode_component(DISTANCE, pano)
        stop = pano == STOP
        u = torch.full(pano.shape, 0.5, dtype=torch.float64)
        return ActionBatch(pano, offset.masked_fill(stop, 0.0), distance.masked_fill(stop, 0.0), u)

    def offset_magnitude(self, actions: ActionBatch) -> torch.Tensor:
        """
        |offset| per row, zero for STOP. Continuous offsets are recomputed from their stored uniform variates
        so that the result is differentiable in the head parameters.
        """
        if self.config.offset_mode == "continuous":
            raw = self._chosen(self.heads.offset_raw, actions.pano)
            offset = map_offset_head(raw[:, 0], raw[:, 1]).icdf(actions.offset_u)
        else:
            offset = actions.offset
        return torch.where(actions.is_stop, torch.zeros_like(offset), offset.abs())


def joint_logprob(heads: HeadOutputs, action: WaypointAction) -> float:
    """log Pano + log Offset + log Dist for a single decision; `-inf` when `action` lies outside the heads' support."""
    return float(WaypointDistribution(heads).log_prob(ActionBatch.from_actions([action]))[0])


def decomposed_entropy(heads: HeadOutputs) -> tuple[float, float, float]:
    return tuple(float(s[0]) for s in WaypointDistribution(heads).entropy())


def mode_action(heads: HeadOutputs) -> WaypointAction:
    return WaypointDistribution(heads).mode().to_actions()[0]


def sample_action(heads: HeadOutputs, generator: Optional[torch.Generator] = None) -> WaypointAction:
    return WaypointDistribution(heads).sample(generator).to_actions()[0]
