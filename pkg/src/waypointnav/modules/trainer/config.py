import argparse
from dataclasses import asdict, dataclass, fields
from typing import Any


@dataclass(frozen=True)
class PPOConfig:
    """PPO hyperparameters; the defaults are those shared by every experiment in the reference setup."""

    n_envs: int = 4
    rollout_length: int = 16
    ppo_epochs: int = 2
    minibatches: int = 4
    learning_rate: float = 2.0e-4
    adam_epsilon: float = 1.0e-5
    clip: float = 0.2
    value_clip: bool = True
    gamma: float = 0.99
    tau: float = 0.95
    c_v: float = 0.5
    c_r: float = 0.1146
    c_e: float = 0.1
    c_p: float = 1.5
    c_o: float = 1.0
    c_d: float = 1.0
    max_grad_norm: float = 0.2
    r_success: float = 2.5
    success_distance: float = 0.5
    slack_scalar: float = -0.05
    normalize_advantages: bool = True

    def __post_init__(self) -> None:
        for f in ("n_envs", "rollout_length", "ppo_epochs", "minibatches"):
            if getattr(self, f) < 1:
                raise ValueError(f"`{f}` must be at least 1, got {getattr(self, f)}")
        if self.minibatches > self.n_envs * self.rollout_length:
            raise ValueError(
                f"Cannot split {self.n_envs * self.rollout_length} transitions into {self.minibatches} minibatches"
            )
        if not 0 <= self.gamma <= 1 or not 0 <= self.tau <= 1:
            raise ValueError(f"gamma and tau must lie in [0, 1], got {self.gamma} and {self.tau}")
        if self.clip < 0 or self.max_grad_norm <= 0 or self.success_distance <= 0:
            raise ValueError("clip must be nonnegative, max_grad_norm and success_distance positive")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "PPOConfig":
        return cls(**_pick(cls, args))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class TrainConfig:
    """
    Attributes:
        total_steps: Environment (waypoint decision) steps to train for.
        eval_interval: Updates between greedy evaluations on the held-out worlds.
        n_eval_episodes: Held-out episodes per evaluation; 0 uses all of them.
        step_cap: Decisions per episode before it times out.
        n_train_worlds: Number of procedurally generated training worlds.
        train_world_seed: Seed of the first training world; the rest follow consecutively.
        navigator: `cn` or `dn`.
    """

    total_steps: int = 100_000
    eval_interval: int = 25
    n_eval_episodes: int = 0
    step_cap: int = 20
    n_train_worlds: int = 64
    train_world_seed: int = 10_000
    navigator: str = "cn"

    def __post_init__(self) -> None:
        if self.navigator not in ("cn", "dn"):
            raise ValueError(f"Unknown navigator '{self.navigator}', choose from ['cn', 'dn']")
        if self.step_cap < 1 or self.n_train_worlds < 1 or self.eval_interval < 1:
            raise ValueError("step_cap, n_train_worlds and eval_interval must be at least 1")

    @property
    def train_seeds(self) -> range:
        return range(self.train_world_seed, self.train_world_seed + self.n_train_worlds)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "TrainConfig":
        return cls(**_pick(cls, args))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _pick(cls: type, args: argparse.Namespace) -> dict[str, Any]:
    return {f.name: getattr(args, f.name) for f in fields(cls) if getattr(args, f.name, None) is not None}
