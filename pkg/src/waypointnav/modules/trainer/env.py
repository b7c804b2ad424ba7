"""The waypoint-level navigation environment: one step is one policy decision and its full navigator execution."""

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import torch

from waypointnav.common.constants import N_SECTORS, SECTOR_WIDTH
from waypointnav.modules.actionspace.heads import WaypointAction, compose_waypoint
from waypointnav.modules.metrics.vln import Decision, EpisodeResult
from waypointnav.modules.navigators import NAVIGATORS
from waypointnav.modules.navigators.commands import Command, Stop
from waypointnav.modules.navigators.continuous import waypoint_target
from waypointnav.modules.policy.network import PolicyState, WaypointPolicy
from waypointnav.modules.policy.observations import Observation, ObservationBatch
from waypointnav.modules.trainer.config import PPOConfig
from waypointnav.modules.trainer.rewards import step_reward
from waypointnav.modules.world.generation import Episode, EpisodeParams, generate_episode
from waypointnav.modules.world.grid import OccupancyGrid, Point, Pose, distance_field, panorama_scan, wrap_heading


@dataclass
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict[str, Any] = field(default_factory=dict)


def goal_hint(pose: Pose, goal: Point, max_range: float) -> tuple[tuple[float, float], ...]:
    """Per sector: 1 and the scaled straight-line goal distance in the sector containing the goal bearing, else 0."""
    bearing = wrap_heading(math.atan2(goal[1] - pose.y, goal[0] - pose.x) - pose.heading)
    sector = int(round(bearing / SECTOR_WIDTH)) % N_SECTORS
    distance = min(math.dist(pose.position, goal) / max_range, 1.0)
    return tuple((1.0, distance) if i == sector else (0.0, 0.0) for i in range(N_SECTORS))


class NavigationEnv:
    """
    Episodes in a set of worlds, with rewards shaped by the geodesic distance to the goal.

    Args:
        worlds: The worlds new episodes are drawn from when `reset` is not given one.
        rng: The environment's stream for drawing worlds and episode seeds.
        cfg: Supplies the reward constants and the success distance.
        navigator: `cn` or `dn`.
        episode_params: Parameters for sampled episodes.
        step_cap: Decisions after which an episode ends without success.
        use_goal_hint: Whether observations carry the goal hint.
        max_range: Range of the panoramic scan.
    """

    def __init__(
        self,
        worlds: Sequence[OccupancyGrid],
        rng: np.random.Generator,
        cfg: Optional[PPOConfig] = None,
        navigator: str = "cn",
        episode_params: Optional[EpisodeParams] = None,
        step_cap: int = 20,
        use_goal_hint: bool = False,
        max_range: float = 10.0,
    ) -> None:
        if navigator not in NAVIGATORS:
            raise ValueError(f"Unknown navigator '{navigator}', choose from {list(NAVIGATORS)}")
        self.worlds = list(worlds)
        self.rng = rng
        self.cfg = cfg or PPOConfig()
        self.navigate = NAVIGATORS[navigator]
        self.episode_params = episode_params or EpisodeParams(success_distance=self.cfg.success_distance)
        self.step_cap = step_cap
        self.use_goal_hint = use_goal_hint
        self.max_range = max_range
        self.grid: Optional[OccupancyGrid] = None
        self.episode: Optional[Episode] = None

    def reset(self, grid: Optional[OccupancyGrid] = None, episode: Optional[Episode] = None) -> Observation:
        """Start `episode` in `grid`, or a fresh episode in a randomly drawn world when neither is given."""
        if (grid is None) != (episode is None):
            raise ValueError("Pass both a grid and an episode, or neither")
        if grid is None:
            index = int(self.rng.integers(len(self.worlds)))
            seed = int(self.rng.integers(2**31))
            grid = self.worlds[index]
            episode = generate_episode(grid, seed, self.episode_params, f"train-{index}-{seed}")
        self.grid, self.episode = grid, episode
        self.pose = episode.start
        self.steps = 0
        self.path: list[Point] = [episode.start.position]
        self.commands: list[Command] = []
        self.decisions: list[Decision] = []
        self.stopped = self.success = False
        self._field = distance_field(grid, episode.goal)
        return self.observe()

    def geodesic(self, point: Point) -> float:
        return float(self._field[self.grid.cell_of(point)])

    def observe(self) -> Observation:
        scan = panorama_scan(self.grid, self.pose, max_range=self.max_range)
        return Observation(
            tuple(float(r) for r in scan.readings),
            self.episode.instruction,
            goal_hint(self.pose, self.episode.goal, self.max_range) if self.use_goal_hint else None,
        )

    def step(self, action: WaypointAction) -> StepResult:
        """
        Execute one decision. STOP ends the episode, succeeding when the geodesic distance to the goal is within
        the success distance; a motion is handed to the navigator. Reaching the step cap ends the episode
        unsuccessfully.
        """
        if self.episode is None or self.stopped or self.steps >= self.step_cap:
            raise RuntimeError("The environment must be reset before stepping")
        start = self.pose
        prev_geo = self.geodesic(start.position)
        if action.is_stop:
            self.stopped = True
            self.success = prev_geo <= self.episode.success_distance
            self.commands.append(Stop())
            self.decisions.append(Decision(start, action))
            new_geo = prev_geo
        else:
            waypoint = compose_waypoint(action)
            outcome = self.navigate(self.grid, start, waypoint)
            self.pose = outcome.final_pose
            self.commands.extend(outcome.commands)
            self.path.extend(outcome.path[1:])
            self.decisions.append(Decision(start, action, waypoint_target(start, waypoint)))
            new_geo = self.geodesic(self.pose.position)
        self.steps += 1
        reward = step_reward(prev_geo, new_geo, action, action.is_stop, self.success, self.cfg)
        done = self.stopped or self.steps >= self.step_cap
        info = {"success": self.success, "timeout": done and not self.stopped, "geodesic": new_geo}
        return StepResult(self.observe(), reward, done, info)

    def result(self) -> EpisodeResult:
        return EpisodeResult(
            episode=self.episode,
            success=self.success,
            path=tuple(self.path),
            commands=tuple(self.commands),
            final_position=self.pose.position,
            decisions=tuple(self.decisions),
            stopped=self.stopped,
        )


def run_episode(
    policy: WaypointPolicy,
    env: NavigationEnv,
    grid: OccupancyGrid,
    episode: Episode,
    greedy: bool = True,
    generator: Optional[torch.Generator] = None,
) -> EpisodeResult:
    """Run `policy` on one episode, taking the mode of every action distribution when `greedy`."""
    observation = env.reset(grid, episode)
    state = PolicyState.zeros(1, policy.config)
    done = False
    while not done:
        actions, _, _, state = policy.act(ObservationBatch.stack([observation]), state, generator, greedy)
        step = env.step(actions.to_actions()[0])
        observation, done = step.observation, step.done
    return env.result()
