"""Greedy evaluation of a checkpoint under a navigator, with optional minimal-time oracles for SCT."""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from tqdm import tqdm

from waypointnav.common.common import derive_seed
from waypointnav.common.exceptions import ParseError, PlannerIncompleteError
from waypointnav.common.io import config_digest
from waypointnav.modules.metrics.motion import MotionModel
from waypointnav.modules.metrics.planners import minimal_time_lattice, minimal_time_rrt
from waypointnav.modules.metrics.vln import EpisodeResult, MetricsReport, episode_report
from waypointnav.modules.navigators.commands import format_command
from waypointnav.modules.policy.network import WaypointPolicy
from waypointnav.modules.trainer.config import PPOConfig
from waypointnav.modules.trainer.trainer import evaluate_policy
from waypointnav.modules.world.generation import Episode
from waypointnav.modules.world.grid import OccupancyGrid, Point, Pose

ORACLES = ("lattice", "rrt")


@dataclass(frozen=True)
class OracleJob:
    grid: OccupancyGrid
    start: Pose
    goal: Point
    model: MotionModel
    planner: str
    seed: int


def oracle_time(job: OracleJob) -> float:
    """The minimal time of one episode; `math.inf` when the planner never reaches the goal."""
    if job.planner == "lattice":
        return minimal_time_lattice(job.grid, job.start, job.goal, job.model).T
    try:
        return minimal_time_rrt(job.grid, job.start, job.goal, job.model, job.seed).T
    except PlannerIncompleteError:
        return math.inf


def oracle_times(jobs: Sequence[OracleJob], workers: int = 1) -> list[float]:
    """Plan every job, in a process pool when `workers` > 1; results keep the order of `jobs`."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            planned = pool.map(oracle_time, jobs)
            return list(tqdm(planned, total=len(jobs), desc="Planning", unit="episode", leave=False))
    return [oracle_time(j) for j in tqdm(jobs, desc="Planning", unit="episode", leave=False)]


def evaluation_digest(checkpoint_digest: str, navigator: str, model: MotionModel) -> str:
    return config_digest({"checkpoint": checkpoint_digest, "navigator": navigator, "motion": model.to_dict()})


def evaluate_checkpoint(
    policy: WaypointPolicy,
    episodes: Sequence[tuple[int, OccupancyGrid, Episode]],
    navigator: str,
    model: MotionModel,
    step_cap: int = 20,
    oracle: Optional[str] = None,
    workers: int = 1,
    ne_mode: str = "geodesic",
    seed: int = 0,
) -> tuple[list[EpisodeResult], list[MetricsReport]]:
    """
    Run `policy` greedily on every episode and score it.

    Args:
        policy: The policy to evaluate.
        episodes: (world seed, grid, episode) triples.
        navigator: `cn` or `dn`.
        model: The motion model behind EET and SCT.
        step_cap: Decisions per episode before it times out.
        oracle: `lattice` or `rrt` to compute SCT, or `None` to leave it at NaN.
        workers: Processes used for the oracle planners.
        ne_mode: `geodesic` or `euclidean` navigation error.
        seed: Seed from which the RRT* sampling streams are derived.

    Returns:
        The episode results and their metrics reports, in the order of `episodes`.
    """
    if oracle is not None and oracle not in ORACLES:
        raise ValueError(f"Unknown oracle '{oracle}', choose from {ORACLES}")
    cfg = PPOConfig()
    results = [
        evaluate_policy(policy, [(grid, episode)], navigator, step_cap, cfg)[0]
        for _, grid, episode in tqdm(episodes, desc="Evaluating", unit="episode", leave=False)
    ]
    times: list[Optional[float]] = [None] * len(episodes)
    if oracle is not None:
        jobs = [
            OracleJob(grid, episode.start, episode.goal, model, oracle, derive_seed(seed, k))
            for k, (_, grid, episode) in enumerate(episodes)
        ]
        times = oracle_times(jobs, workers)
    reports = [
        episode_report(result, grid, model, t, ne_mode) for result, (_, grid, _), t in zip(results, episodes, times)
    ]
    return results, reports


def result_to_json(result: EpisodeResult, world_seed: int) -> str:
    """One line of the evaluation log: everything `render` needs to redraw the episode."""
    episode = result.episode
    record: dict[str, Any] = {
        "id": episode.id,
        "world_seed": world_seed,
        "start": [episode.start.x, episode.start.y, episode.start.heading],
        "goal": list(episode.goal),
        "success": result.success,
        "stopped": result.stopped,
        "path": [list(p) for p in result.path],
        "final_position": list(result.final_position),
        "commands": [format_command(c) for c in result.commands],
        "decisions": [
            {
                "pose": [d.pose.x, d.pose.y, d.pose.heading],
                "pano": d.action.pano,
                "offset": d.action.offset,
                "distance": d.action.distance,
                "target": None if d.target is None else list(d.target),
            }
            for d in result.decisions
        ],
    }
    return json.dumps(record, sort_keys=True)


@dataclass(frozen=True)
class LoggedEpisode:
    id: str
    world_seed: int
    start: Pose
    goal: Point
    success: bool
    path: tuple[Point, ...]
    decision_poses: tuple[Pose, ...]
    targets: tuple[Optional[Point], ...]


def result_from_json(text: str, line: int) -> LoggedEpisode:
    """
    Raises:
        ParseError: If the line is not a well-formed evaluation log record.
    """
    try:
        record = json.loads(text)
        return LoggedEpisode(
            id=str(record["id"]),
            world_seed=int(record["world_seed"]),
            start=Pose(*map(float, record["start"])),
            goal=tuple(map(float, record["goal"])),
            success=bool(record["success"]),
            path=tuple(tuple(map(float, p)) for p in record["path"]),
            decision_poses=tuple(Pose(*map(float, d["pose"])) for d in record["decisions"]),
            targets=tuple(None if d["target"] is None else tuple(map(float, d["target"])) for d in record["decisions"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed evaluation record ({type(e).__name__}: {e})", line) from e
