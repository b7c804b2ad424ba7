import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
import torch
from tqdm import tqdm

from waypointnav.common.common import derive_seed, torch_rng
from waypointnav.common.exceptions import NumericAbort
from waypointnav.modules.metrics.vln import EpisodeResult, vln_metrics
from waypointnav.modules.policy.io import save_checkpoint
from waypointnav.modules.policy.network import WaypointPolicy
from waypointnav.modules.trainer.config import PPOConfig, TrainConfig
from waypointnav.modules.trainer.env import NavigationEnv, run_episode
from waypointnav.modules.trainer.ppo import gae, make_optimizer, normalize_advantages, ppo_step
from waypointnav.modules.trainer.rollout import RolloutCollector
from waypointnav.modules.world.generation import Episode, EpisodeParams, WorldParams, generate_world
from waypointnav.modules.world.grid import OccupancyGrid

LOSS_COLUMNS = (
    "action",
    "value",
    "entropy_pano",
    "entropy_offset",
    "entropy_distance",
    "offset",
    "total",
    "clip_fraction",
    "grad_norm",
)


@dataclass
class TrainRun:
    """Progress of a training run, saved with every checkpoint."""

    update: int = 0
    step: int = 0
    best_spl: float = -math.inf
    best_update: int = -1
    env_seeds: list[int] = field(default_factory=list)


def check_disjoint(train_seeds: Sequence[int], validation_seeds: Sequence[int]) -> None:
    """
    Raises:
        ValueError: If a world seed is used both for training and for validation.
    """
    shared = sorted(set(train_seeds) & set(validation_seeds))
    if shared:
        raise ValueError(
            f"Training and validation world seeds overlap at {shared[:5]}, move `train_world_seed` or regenerate"
        )


def evaluate_policy(
    policy: WaypointPolicy,
    episodes: Sequence[tuple[OccupancyGrid, Episode]],
    navigator: str,
    step_cap: int,
    cfg: Optional[PPOConfig] = None,
) -> list[EpisodeResult]:
    """Greedy (mode-action) rollouts of `policy` on each of `episodes`."""
    env = NavigationEnv(
        [],
        np.random.default_rng(0),
        cfg,
        navigator,
        step_cap=step_cap,
        use_goal_hint=policy.config.use_goal_hint,
        max_range=policy.config.max_range,
    )
    return [run_episode(policy, env, grid, episode) for grid, episode in episodes]


def success_rates(results: Sequence[EpisodeResult], grids: Sequence[OccupancyGrid]) -> tuple[float, float]:
    """Mean SR and SPL over `results`."""
    if not results:
        return 0.0, 0.0
    metrics = [vln_metrics(r, g) for r, g in zip(results, grids)]
    return float(np.mean([m.SR for m in metrics])), float(np.mean([m.SPL for m in metrics]))


def make_envs(
    seed: int,
    ppo: PPOConfig,
    train: TrainConfig,
    world_params: WorldParams,
    episode_params: EpisodeParams,
    policy: WaypointPolicy,
    offset: int = 0,
) -> tuple[list[NavigationEnv], list[int]]:
    """Environments over freshly generated training worlds, each seeded from (`seed`, env index, `offset`)."""
    worlds = [generate_world(s, world_params) for s in train.train_seeds]
    seeds = [derive_seed(seed, i, offset) for i in range(ppo.n_envs)]
    envs = [
        NavigationEnv(
            worlds,
            np.random.default_rng(s),
            ppo,
            train.navigator,
            episode_params,
            train.step_cap,
            policy.config.use_goal_hint,
            policy.config.max_range,
        )
        for s in seeds
    ]
    return envs, seeds


def train(
    policy: WaypointPolicy,
    ppo: PPOConfig,
    train_config: TrainConfig,
    world_params: WorldParams,
    episode_params: EpisodeParams,
    validation: Sequence[tuple[int, OccupancyGrid, Episode]],
    dir_checkpoints: Path,
    seed: int,
    resume: Optional[dict[str, Any]] = None,
) -> tuple[TrainRun, pd.DataFrame]:
    """
    Train `policy` with PPO: collect rollouts, estimate advantages, run `ppo_epochs` passes of minibatch updates
    with global-norm gradient clipping and periodically evaluate greedily on the held-out `validation` episodes,
    keeping the checkpoint with the best SPL as `best.pt` and the most recent as `latest.pt`.

    Args:
        policy: The policy to train in place.
        ppo: The PPO hyperparameters.
        train_config: Run length, evaluation cadence and training-world settings.
        world_params: Parameters of the generated training worlds.
        episode_params: Parameters of the sampled training episodes.
        validation: (world seed, grid, episode) triples for evaluation.
        dir_checkpoints: Where checkpoints are written.
        seed: The run seed every environment and sampling stream is derived from.
        resume: The extra state of a `latest.pt` checkpoint to continue from.

    Returns:
        The final run state and the training log, one row per update.

    Raises:
        ValueError: If training and validation world seeds overlap.
        NumericAbort: If a loss or gradient becomes non-finite; `latest.pt` then holds the last good update.
    """
    check_disjoint(train_config.train_seeds, [s for s, _, _ in validation])
    run = TrainRun(**resume["run"]) if resume else TrainRun()
    optimizer = make_optimizer(policy, ppo, resume["optimizer"] if resume else None)
    log = pd.DataFrame(resume["log"]) if resume else pd.DataFrame()
    envs, run.env_seeds = make_envs(seed, ppo, train_config, world_params, episode_params, policy, run.update)
    collector = RolloutCollector(envs, policy, derive_seed(seed, run.update))
    shuffler = torch_rng(seed, run.update, len(envs))
    n_eval = train_config.n_eval_episodes or len(validation)
    held_out = [(g, e) for _, g, e in validation[:n_eval]]

    per_update = ppo.n_envs * ppo.rollout_length
    n_updates = math.ceil(train_config.total_steps / per_update)
    rows = log.to_dict("records")
    start_time = time.time()

    def checkpoint(name: str) -> None:
        extra = {"run": asdict(run), "optimizer": optimizer.state_dict(), "log": rows, "ppo": ppo.to_dict()}
        save_checkpoint(dir_checkpoints / f"{name}.pt", policy, extra)

    updates = range(run.update, n_updates)
    for update in tqdm(updates, desc="Training", unit="update", initial=run.update, total=n_updates):
        buffer = collector.collect(policy, ppo)
        advantages, returns = gae(buffer.rewards, buffer.values, buffer.dones, buffer.last_values, ppo.gamma, ppo.tau)
        if ppo.normalize_advantages:
            advantages = normalize_advantages(advantages)
        stats: list[dict[str, float]] = []
        try:
            for _ in range(ppo.ppo_epochs):
                for batch in buffer.minibatches(ppo.minibatches, advantages, returns, shuffler):
                    stats.append(ppo_step(policy, optimizer, batch, ppo))
        except NumericAbort as e:
            e.diagnostic.update({"update": update, "step": run.step})
            tqdm.write(f"Aborting at update {update}: {e} {e.diagnostic}")
            raise
        run.update, run.step = update + 1, run.step + per_update
        motions = sum(ep["motions"] for ep in buffer.episodes)
        row: dict[str, float] = {
            "update": run.update,
            "step": run.step,
            **{k: float(np.mean([s[k] for s in stats])) for k in LOSS_COLUMNS},
            "episodes": len(buffer.episodes),
            "train_success": float(np.mean([ep["success"] for ep in buffer.episodes])) if buffer.episodes else math.nan,
            "mean_predicted_distance": sum(ep["predicted_distance"] for ep in buffer.episodes) / motions
            if motions
            else math.nan,
            "eval_sr": math.nan,
            "eval_spl": math.nan,
        }
        if held_out and (run.update % train_config.eval_interval == 0 or run.update == n_updates):
            results = evaluate_policy(policy, held_out, train_config.navigator, train_config.step_cap, ppo)
            row["eval_sr"], row["eval_spl"] = success_rates(results, [g for g, _ in held_out])
            if row["eval_spl"] > run.best_spl:
                run.best_spl, run.best_update = row["eval_spl"], run.update
                checkpoint("best")
            tqdm.write(
                f"update {run.update}/{n_updates} step {run.step}: loss {row['total']:.4f}, "
                f"eval SR {row['eval_sr']:.3f}, SPL {row['eval_spl']:.3f} ({time.time() - start_time:.1f}s)"
            )
        rows.append(row)
        checkpoint("latest")
    if run.best_update < 0:
        checkpoint("best")
    return run, pd.DataFrame(rows)
