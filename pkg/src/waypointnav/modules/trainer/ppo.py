"""Generalised advantage estimation and the clipped PPO objective with decomposed entropy and offset terms."""

import math
from dataclasses import dataclass, fields
from typing import Optional

import torch

from waypointnav.common.exceptions import NumericAbort
from waypointnav.modules.actionspace.heads import ActionBatch
from waypointnav.modules.policy.network import PolicyState, WaypointPolicy
from waypointnav.modules.policy.observations import ObservationBatch
from waypointnav.modules.trainer.config import PPOConfig

ADVANTAGE_EPSILON = 1e-8


def gae(
    rewards: torch.Tensor,
    values: torch.Tensor,
    dones: torch.Tensor,
    last_value: torch.Tensor,
    gamma: float,
    tau: float,
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Generalised advantage estimates along the first (time) dimension:

        δ_t = r_t + γ·(1 − done_t)·V_{t+1} − V_t
        A_t = δ_t + γ·τ·(1 − done_t)·A_{t+1}

    with V_T = `last_value`, the bootstrap value of the state after the last step.

    Args:
        rewards: Shape (T, ...).
        values: Value estimates of the visited states, shape (T, ...).
        dones: Whether the episode ended with step t, shape (T, ...).
        last_value: Shape (...).
        gamma: The discount factor.
        tau: The GAE smoothing parameter.

    Returns:
        The advantages and the returns (advantages + values).

    Raises:
        ValueError: If the shapes do not line up.
    """
    rewards, values = torch.as_tensor(rewards, dtype=torch.float64), torch.as_tensor(values, dtype=torch.float64)
    dones = torch.as_tensor(dones, dtype=torch.float64)
    last_value = torch.as_tensor(last_value, dtype=torch.float64)
    if rewards.shape != values.shape or rewards.shape != dones.shape:
        raise ValueError(
            f"rewards, values and dones must have equal shapes, got {tuple(rewards.shape)}, "
            f"{tuple(values.shape)} and {tuple(dones.shape)}"
        )
    if last_value.shape != rewards.shape[1:]:
        expected = tuple(rewards.shape[1:])
        raise ValueError(f"The bootstrap value has shape {tuple(last_value.shape)}, expected {expected}")
    advantages = torch.zeros_like(rewards)
    running = torch.zeros_like(last_value)
    next_value = last_value
    for t in reversed(range(len(rewards))):
        live = 1.0 - dones[t]
        delta = rewards[t] + gamma * live * next_value - values[t]
        running = delta + gamma * tau * live * running
        advantages[t] = running
        next_value = values[t]
    return advantages, advantages + values


def normalize_advantages(advantages: torch.Tensor, epsilon: float = ADVANTAGE_EPSILON) -> torch.Tensor:
    """Shift and scale to zero mean and unit (population) variance."""
    return (advantages - advantages.mean()) / (advantages.std(unbiased=False) + epsilon)


@dataclass
class Minibatch:
    observations: ObservationBatch
    states: PolicyState
    actions: ActionBatch
    log_probs: torch.Tensor
    values: torch.Tensor
    advantages: torch.Tensor
    returns: torch.Tensor


@dataclass
class PPOLosses:
    action: torch.Tensor
    value: torch.Tensor
    entropy_pano: torch.Tensor
    entropy_offset: torch.Tensor
    entropy_distance: torch.Tensor
    entropy: torch.Tensor
    offset: torch.Tensor
    standard: torch.Tensor
    total: torch.Tensor
    clip_fraction: torch.Tensor

    def as_floats(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name).detach()) for f in fields(self)}


def ppo_losses(policy: WaypointPolicy, batch: Minibatch, cfg: PPOConfig) -> PPOLosses:
    """
    The clipped PPO objective on a minibatch of stored decisions.

        L_standard = L_action + c_v·L_value − c_e·(c_p·S_pano + c_o·S_offset + c_d·S_dist)
        L_total = L_standard + c_r·L_offset

    L_action is the negated mean of min(ratio·A, clip(ratio)·A), taking the unclipped term on ties. L_value is half
    the mean squared error against the returns, clipped around the stored values when `cfg.value_clip` is set.
    L_offset is the mean |offset| over motion decisions, evaluated pathwise for continuous offsets.

    Raises:
        NumericAbort: If any loss term is not finite.
    """
    log_probs, values, (s_pano, s_offset, s_dist), offsets = policy.evaluate_actions(
        batch.observations, batch.states, batch.actions
    )
    ratio = torch.exp(log_probs - batch.log_probs)
    unclipped = ratio * batch.advantages
    clipped = ratio.clamp(1 - cfg.clip, 1 + cfg.clip) * batch.advantages
    action = -torch.where(clipped < unclipped, clipped, unclipped).mean()

    error = (values - batch.returns) ** 2
    if cfg.value_clip:
        values_clipped = batch.values + (values - batch.values).clamp(-cfg.clip, cfg.clip)
        error = torch.max(error, (values_clipped - batch.returns) ** 2)
    value = 0.5 * error.mean()

    entropy_pano, entropy_offset, entropy_distance = s_pano.mean(), s_offset.mean(), s_dist.mean()
    entropy = cfg.c_p * entropy_pano + cfg.c_o * entropy_offset + cfg.c_d * entropy_distance
    motion = ~batch.actions.is_stop
    offset = offsets[motion].mean() if bool(motion.any()) else offsets.sum() * 0.0

    standard = action + cfg.c_v * value - cfg.c_e * entropy
    total = standard + cfg.c_r * offset
    losses = PPOLosses(
        action,
        value,
        entropy_pano,
        entropy_offset,
        entropy_distance,
        entropy,
        offset,
        standard,
        total,
        ((ratio - 1).abs() > cfg.clip).to(torch.float64).mean(),
    )
    if not all(math.isfinite(v) for v in losses.as_floats().values()):
        raise NumericAbort("Non-finite PPO loss", diagnostic=losses.as_floats())
    return losses


def ppo_step(
    policy: WaypointPolicy, optimizer: torch.optim.Optimizer, batch: Minibatch, cfg: PPOConfig
) -> dict[str, float]:
    """One gradient step on `batch` with global-norm clipping; returns the losses and the pre-clip gradient norm."""
    losses = ppo_losses(policy, batch, cfg)
    optimizer.zero_grad()
    losses.total.backward()
    norm = torch.nn.utils.clip_grad_norm_(policy.parameters(), cfg.max_grad_norm)
    if not math.isfinite(float(norm)):
        raise NumericAbort("Non-finite gradient norm", diagnostic={**losses.as_floats(), "grad_norm": float(norm)})
    optimizer.step()
    return {**losses.as_floats(), "grad_norm": float(norm)}


def make_optimizer(policy: WaypointPolicy, cfg: PPOConfig, state: Optional[dict] = None) -> torch.optim.Adam:
    optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.learning_rate, eps=cfg.adam_epsilon)
    if state is not None:
        optimizer.load_state_dict(state)
    return optimizer
