"""Synchronous rollout collection across several environments into a replayable buffer."""

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import torch

from waypointnav.common.common import torch_rng
from waypointnav.common.exceptions import EnvironmentFault
from waypointnav.modules.actionspace.heads import ActionBatch
from waypointnav.modules.policy.network import PolicyState, WaypointPolicy
from waypointnav.modules.policy.observations import Observation, ObservationBatch
from waypointnav.modules.trainer.config import PPOConfig
from waypointnav.modules.trainer.env import NavigationEnv
from waypointnav.modules.trainer.ppo import Minibatch


@dataclass
class RolloutBuffer:
    """
    Transitions indexed [step][env]. `states` holds each decision's recurrent state at its start, so that every
    decision can be re-evaluated on its own under new parameters.
    """

    observations: list[list[Observation]]
    states: list[PolicyState]
    actions: list[ActionBatch]
    log_probs: torch.Tensor
    values: torch.Tensor
    rewards: torch.Tensor
    dones: torch.Tensor
    last_values: torch.Tensor
    episodes: list[dict] = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return len(self.observations)

    @property
    def n_envs(self) -> int:
        return len(self.observations[0]) if self.observations else 0

    def __len__(self) -> int:
        return self.n_steps * self.n_envs

    def _flat(self, tensor: torch.Tensor) -> torch.Tensor:
        """(T, N, ...) to (N·T, ...), ordered by environment index then step."""
        return tensor.transpose(0, 1).reshape(len(self), *tensor.shape[2:])

    def flatten(self, advantages: torch.Tensor, returns: torch.Tensor) -> Minibatch:
        order = [(t, e) for e in range(self.n_envs) for t in range(self.n_steps)]
        states = PolicyState.cat([self.states[t][e : e + 1] for t, e in order])
        actions = ActionBatch.cat([self.actions[t][torch.tensor([e])] for t, e in order])
        return Minibatch(
            ObservationBatch.stack([self.observations[t][e] for t, e in order]),
            states,
            actions,
            self._flat(self.log_probs),
            self._flat(self.values),
            self._flat(advantages),
            self._flat(returns),
        )

    def minibatches(
        self, n: int, advantages: torch.Tensor, returns: torch.Tensor, generator: Optional[torch.Generator] = None
    ) -> Iterator[Minibatch]:
        """`n` disjoint random minibatches covering the whole buffer."""
        full = self.flatten(advantages, returns)
        permutation = torch.randperm(len(self), generator=generator)
        for index in torch.tensor_split(permutation, n):
            yield Minibatch(
                full.observations[index],
                full.states[index],
                full.actions[index],
                full.log_probs[index],
                full.values[index],
                full.advantages[index],
                full.returns[index],
            )


class RolloutCollector:
    """
    Keeps `envs` running across rollouts, each with its own action-sampling stream derived from `seed` and the
    environment index. Finished episodes are reset automatically.
    """

    def __init__(self, envs: Sequence[NavigationEnv], policy: WaypointPolicy, seed: int) -> None:
        self.envs = list(envs)
        self.generators = [torch_rng(seed, i) for i in range(len(self.envs))]
        self.states = [PolicyState.zeros(1, policy.config) for _ in self.envs]
        self.observations = [self._guard(i, env.reset) for i, env in enumerate(self.envs)]
        self.returns = [0.0] * len(self.envs)

    def _guard(self, index: int, fn, *args):
        try:
            return fn(*args)
        except Exception as e:
            raise EnvironmentFault(f"{type(e).__name__}: {e}", index) from e

    @torch.no_grad()
    def collect(self, policy: WaypointPolicy, cfg: PPOConfig) -> RolloutBuffer:
        """
        Step every environment `cfg.rollout_length` times with actions sampled from `policy`. The environments are
        logical workers stepped in env-index order within one process, so the buffer does not depend on scheduling;
        the end of the rollout is the synchronisation point before the update.

        Raises:
            EnvironmentFault: If an environment fails, carrying its index.
        """
        n_envs, length = len(self.envs), cfg.rollout_length
        log_probs, values, rewards, dones = (torch.zeros(length, n_envs, dtype=torch.float64) for _ in range(4))
        observations, states, actions, episodes = [], [], [], []
        for t in range(length):
            observations.append(list(self.observations))
            states.append(PolicyState.cat(self.states))
            step_actions = []
            for i, env in enumerate(self.envs):
                action, log_prob, value, next_state = policy.act(
                    ObservationBatch.stack([self.observations[i]]), self.states[i], self.generators[i]
                )
                step = self._guard(i, env.step, action.to_actions()[0])
                step_actions.append(action)
                log_probs[t, i], values[t, i], rewards[t, i] = log_prob[0], value[0], step.reward
                self.returns[i] += step.reward
                if step.done:
                    dones[t, i] = 1.0
                    result = env.result()
                    episodes.append(
                        {
                            "env": i,
                            "success": float(result.success),
                            "return": self.returns[i],
                            "decisions": len(result.decisions),
                            "predicted_distance": sum(result.predicted_distances),
                            "motions": len(result.predicted_distances),
                        }
                    )
                    self.returns[i] = 0.0
                    self.states[i] = PolicyState.zeros(1, policy.config)
                    self.observations[i] = self._guard(i, env.reset)
                else:
                    self.states[i] = next_state
                    self.observations[i] = step.observation
            actions.append(ActionBatch.cat(step_actions))
        last = policy(ObservationBatch.stack(self.observations), PolicyState.cat(self.states)).value
        return RolloutBuffer(observations, states, actions, log_probs, values, rewards, dones, last, episodes)
