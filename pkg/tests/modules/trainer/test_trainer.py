import math

import numpy as np
import pytest
import torch

from waypointnav.common.exceptions import EnvironmentFault
from waypointnav.modules.metrics.motion import MotionModel
from waypointnav.modules.metrics.vln import episode_report
from waypointnav.modules.policy.io import load_checkpoint
from waypointnav.modules.policy.network import PolicyConfig, WaypointPolicy
from waypointnav.modules.trainer.config import PPOConfig, TrainConfig
from waypointnav.modules.trainer.env import NavigationEnv
from waypointnav.modules.trainer.rollout import RolloutCollector
from waypointnav.modules.trainer.trainer import LOSS_COLUMNS, check_disjoint, evaluate_policy, success_rates, train
from waypointnav.modules.world.generation import EpisodeParams, WorldParams, generate_episode, generate_world

PPO = PPOConfig(n_envs=2, rollout_length=4, ppo_epochs=1, minibatches=2)


def make_envs(grid, episode_params, n: int = 2, seed: int = 0) -> list[NavigationEnv]:
    return [
        NavigationEnv([grid], np.random.default_rng(seed + i), PPO, episode_params=episode_params, step_cap=3)
        for i in range(n)
    ]


def collect(small_world, small_episode_params, policy, seed: int = 0):
    grid, _ = small_world
    return RolloutCollector(make_envs(grid, small_episode_params), policy, seed).collect(policy, PPO)


def test_rollouts_are_reproducible(small_world, small_episode_params, small_policy) -> None:
    first = collect(small_world, small_episode_params, small_policy)
    second = collect(small_world, small_episode_params, small_policy)
    assert torch.equal(first.rewards, second.rewards)
    assert torch.equal(first.log_probs, second.log_probs)
    assert torch.equal(first.dones, second.dones)
    assert first.episodes == second.episodes


def test_rollout_buffer_layout(small_world, small_episode_params, small_policy) -> None:
    buffer = collect(small_world, small_episode_params, small_policy)
    assert (buffer.n_steps, buffer.n_envs, len(buffer)) == (4, 2, 8)
    assert buffer.rewards.shape == buffer.values.shape == (4, 2)
    assert buffer.last_values.shape == (2,)
    # a three-decision cap ends at least one episode per environment within four steps
    assert buffer.dones.sum(dim=0).min() >= 1
    assert {ep["env"] for ep in buffer.episodes} == {0, 1}

    advantages = torch.arange(8, dtype=torch.float64).reshape(4, 2)
    full = buffer.flatten(advantages, advantages)
    assert full.advantages.tolist() == [0.0, 2.0, 4.0, 6.0, 1.0, 3.0, 5.0, 7.0]
    batches = list(buffer.minibatches(2, advantages, advantages, torch.Generator().manual_seed(0)))
    assert [len(b.advantages) for b in batches] == [4, 4]
    assert sorted(torch.cat([b.advantages for b in batches]).tolist()) == list(map(float, range(8)))


def test_stored_states_replay_the_stored_log_probabilities(small_world, small_episode_params, small_policy) -> None:
    buffer = collect(small_world, small_episode_params, small_policy)
    advantages, returns = torch.zeros(4, 2, dtype=torch.float64), torch.zeros(4, 2, dtype=torch.float64)
    full = buffer.flatten(advantages, returns)
    log_probs, values, _, _ = small_policy.evaluate_actions(full.observations, full.states, full.actions)
    assert torch.allclose(log_probs, full.log_probs, atol=1e-9)
    assert torch.allclose(values, full.values, atol=1e-9)


def test_failing_environments_are_reported(small_world, small_episode_params, small_policy) -> None:
    grid, _ = small_world
    envs = make_envs(grid, small_episode_params)
    envs[1].worlds = []
    with pytest.raises(EnvironmentFault, match="env 1") as e:
        RolloutCollector(envs, small_policy, 0)
    assert e.value.env_index == 1


def test_check_disjoint() -> None:
    check_disjoint(range(10_000, 10_004), [0, 1, 2])
    with pytest.raises(ValueError, match="overlap at \\[10001\\]"):
        check_disjoint(range(10_000, 10_004), [7, 10_001])


def test_greedy_evaluation_and_success_rates(small_world, small_policy) -> None:
    grid, episodes = small_world
    results = evaluate_policy(small_policy, [(grid, e) for e in episodes], "cn", step_cap=4)
    assert [r.episode.id for r in results] == [e.id for e in episodes]
    sr, spl = success_rates(results, [grid] * len(results))
    assert 0.0 <= spl <= sr <= 1.0
    assert success_rates([], []) == (0.0, 0.0)


def test_train_config() -> None:
    assert list(TrainConfig(n_train_worlds=3).train_seeds) == [10_000, 10_001, 10_002]
    with pytest.raises(ValueError, match="Unknown navigator"):
        TrainConfig(navigator="xx")


@pytest.fixture
def short_run(tmp_path, small_world, small_world_params, small_episode_params, small_policy):
    grid, episodes = small_world
    train_config = TrainConfig(total_steps=16, eval_interval=1, n_train_worlds=2, step_cap=3)
    validation = [(3, grid, e) for e in episodes[:2]]

    def run(total_steps: int = 16, resume=None):
        config = TrainConfig(**{**train_config.to_dict(), "total_steps": total_steps})
        return train(
            small_policy,
            PPO,
            config,
            small_world_params,
            small_episode_params,
            validation,
            tmp_path / "checkpoints",
            seed=0,
            resume=resume,
        )

    return run


def test_training_writes_checkpoints_and_a_log(tmp_path, short_run, small_policy) -> None:
    run, log = short_run()
    assert (run.update, run.step) == (2, 16)
    assert len(log) == 2
    assert set(LOSS_COLUMNS) <= set(log.columns)
    assert log["eval_spl"].notna().all()
    assert run.best_update in (1, 2)
    assert run.best_spl == pytest.approx(log["eval_spl"].max())
    assert np.isfinite(log["total"]).all()

    policy, extra = load_checkpoint(tmp_path / "checkpoints" / "latest.pt", small_policy.config.digest())
    assert extra["run"]["update"] == 2
    assert len(extra["log"]) == 2
    for ours, theirs in zip(policy.parameters(), small_policy.parameters()):
        assert torch.equal(ours, theirs)
    assert (tmp_path / "checkpoints" / "best.pt").exists()


def test_training_resumes_from_the_latest_checkpoint(tmp_path, short_run, small_policy) -> None:
    short_run(total_steps=8)
    _, extra = load_checkpoint(tmp_path / "checkpoints" / "latest.pt")
    run, log = short_run(total_steps=16, resume=extra)
    assert run.update == 2
    assert log["update"].tolist() == [1, 2]


def test_overlapping_validation_worlds_are_refused(tmp_path, small_world, small_world_params, small_policy) -> None:
    grid, episodes = small_world
    with pytest.raises(ValueError, match="overlap"):
        train(
            small_policy,
            PPO,
            TrainConfig(total_steps=8, n_train_worlds=2),
            small_world_params,
            None,
            [(10_001, grid, episodes[0])],
            tmp_path,
            seed=0,
        )


@pytest.mark.slow
def test_longer_training_stays_finite(tmp_path, small_world, small_world_params, small_episode_params) -> None:
    torch.manual_seed(0)
    policy = WaypointPolicy(PolicyConfig(sector_dim=16, h_vis_dim=32, h_a_dim=32, embedding_dim=8, use_goal_hint=True))
    grid, episodes = small_world
    run, log = train(
        policy,
        PPOConfig(n_envs=4, rollout_length=16, learning_rate=1e-3),
        TrainConfig(total_steps=64 * 30, eval_interval=10, n_train_worlds=8, step_cap=8),
        small_world_params,
        small_episode_params,
        [(3, grid, e) for e in episodes],
        tmp_path,
        seed=0,
    )
    assert len(log) == 30
    assert log["eval_spl"].notna().sum() == 3
    assert all(math.isfinite(v) for v in log["total"])
    assert log["train_success"].between(0.0, 1.0).all()
    best, _ = load_checkpoint(tmp_path / "best.pt", policy.config.digest())
    assert best.config == policy.config
    assert run.best_update in (10, 20, 30)


EMPTY_ROOM = WorldParams(kind="open", width_cells=20, height_cells=20, n_pillars=0)
EMPTY_ROOM_EPISODES = EpisodeParams(min_geodesic=1.0, max_geodesic=3.0)


def held_out(seeds: range) -> list:
    worlds = [(s, generate_world(s, EMPTY_ROOM)) for s in seeds]
    return [(s, grid, generate_episode(grid, s, EMPTY_ROOM_EPISODES, f"w{s}")) for s, grid in worlds]


def train_empty_room_agent(directory, expressivity: str, step_cap: int, total_steps: int = 500_000) -> WaypointPolicy:
    torch.manual_seed(0)
    policy = WaypointPolicy(PolicyConfig(expressivity=expressivity, use_goal_hint=True))
    directory.mkdir()
    train(
        policy,
        PPOConfig(n_envs=8, rollout_length=32, learning_rate=1e-3),
        TrainConfig(total_steps=total_steps, eval_interval=50, n_train_worlds=64, step_cap=step_cap),
        EMPTY_ROOM,
        EMPTY_ROOM_EPISODES,
        held_out(range(100, 120)),
        directory,
        seed=0,
    )
    best, _ = load_checkpoint(directory / "best.pt", policy.config.digest())
    return best


@pytest.mark.slow
def test_empty_room_curriculum_is_learned(tmp_path) -> None:
    policy = train_empty_room_agent(tmp_path / "wpn", "cc", step_cap=20)
    test = held_out(range(200, 400))
    results = evaluate_policy(policy, [(g, e) for _, g, e in test], "cn", 20)
    sr, _ = success_rates(results, [g for _, g, _ in test])
    assert sr >= 0.9


@pytest.mark.slow
def test_fixed_steps_need_more_commands_and_time_than_waypoints(tmp_path) -> None:
    wpn = train_empty_room_agent(tmp_path / "wpn", "cc", step_cap=20)
    hpn = train_empty_room_agent(tmp_path / "hpn", "fixedfixed", step_cap=60)
    test = held_out(range(200, 300))
    episodes, grids = [(g, e) for _, g, e in test], [g for _, g, _ in test]
    model = MotionModel()
    wpn_reports = [episode_report(r, g, model) for r, g in zip(evaluate_policy(wpn, episodes, "cn", 20), grids)]
    hpn_reports = [episode_report(r, g, model) for r, g in zip(evaluate_policy(hpn, episodes, "cn", 60), grids)]

    assert np.mean([r.n_commands for r in hpn_reports]) >= 2 * np.mean([r.n_commands for r in wpn_reports])
    both = [(w, h) for w, h in zip(wpn_reports, hpn_reports) if w.SR and h.SR]
    assert len(both) >= 10
    assert np.mean([w.EET for w, _ in both]) <= 0.75 * np.mean([h.EET for _, h in both])
