"""Per-episode navigation metrics and their aggregation."""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from waypointnav.common.constants import REPORT_COLUMNS
from waypointnav.modules.actionspace.heads import WaypointAction
from waypointnav.modules.metrics.motion import MotionModel, eet, issued_commands
from waypointnav.modules.navigators.commands import Command
from waypointnav.modules.world.generation import Episode
from waypointnav.modules.world.grid import OccupancyGrid, Point, Pose, distance_field, polyline_length

NE_MODES = ("geodesic", "euclidean")


@dataclass(frozen=True)
class Decision:
    """One waypoint decision: the pose it was taken from, the action, and the world target of motion actions."""

    pose: Pose
    action: WaypointAction
    target: Optional[Point] = None


@dataclass(frozen=True)
class EpisodeResult:
    episode: Episode
    success: bool
    path: tuple[Point, ...]
    commands: tuple[Command, ...]
    final_position: Point
    decisions: tuple[Decision, ...] = ()
    stopped: bool = False

    @property
    def predicted_distances(self) -> list[float]:
        return [d.action.distance for d in self.decisions if not d.action.is_stop]


@dataclass(frozen=True)
class VLNMetrics:
    TL: float
    NE: float
    OS: int
    SR: int
    SPL: float


@dataclass(frozen=True)
class MetricsReport:
    """One episode's metrics; `as_row` gives the CSV columns in their canonical order."""

    TL: float
    NE: float
    OS: int
    SR: int
    SPL: float
    EET: float
    SCT: float
    n_commands: int
    speed: float
    decision_count: int = 0
    episode_id: str = ""

    def as_row(self) -> dict[str, Any]:
        row = asdict(self)
        return {"episode_id": row.pop("episode_id"), **{c: row[c] for c in REPORT_COLUMNS}, **row}

    @staticmethod
    def aggregate(reports: Sequence["MetricsReport"]) -> dict[str, float]:
        """Mean of every numeric column over `reports` ignoring NaNs, empty when there are none."""
        if not reports:
            return {}
        means = pd.DataFrame([r.as_row() for r in reports]).drop(columns="episode_id").astype(float).mean()
        return {k: float(v) for k, v in means.items()}


def densify(path: Sequence[Point], spacing: float) -> np.ndarray:
    """Points along `path` no more than `spacing` apart, including every vertex."""
    points = [np.asarray(path[0], dtype=float)]
    for p, q in zip(path[:-1], path[1:]):
        p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
        n = max(1, math.ceil(math.dist(p, q) / spacing))
        points.extend(p + (q - p) * (k / n) for k in range(1, n + 1))
    return np.array(points)


def distance_to_goal(grid: OccupancyGrid, goal: Point, points: np.ndarray, mode: str = "geodesic") -> np.ndarray:
    if mode == "euclidean":
        return np.hypot(points[:, 0] - goal[0], points[:, 1] - goal[1])
    field = distance_field(grid, goal)
    rows = np.floor(points[:, 1] / grid.resolution).astype(int)
    cols = np.floor(points[:, 0] / grid.resolution).astype(int)
    return field[rows, cols]


def vln_metrics(result: EpisodeResult, grid: OccupancyGrid, ne_mode: str = "geodesic") -> VLNMetrics:
    """
    Trajectory length, navigation error, oracle success, success and success weighted by path length.

    Args:
        result: The episode to score.
        grid: The world the episode was run in.
        ne_mode: `geodesic` (default) or `euclidean` distance to the goal.

    Returns:
        The metrics, with SPL = SR·ℓ/max(TL, ℓ) for the episode's shortest path length ℓ.
    """
    if ne_mode not in NE_MODES:
        raise ValueError(f"Unknown navigation error mode '{ne_mode}', choose from {NE_MODES}")
    episode = result.episode
    tl = polyline_length(result.path)
    ne = float(distance_to_goal(grid, episode.goal, np.array([result.final_position]), ne_mode)[0])
    near = distance_to_goal(grid, episode.goal, densify(result.path, grid.resolution / 2), ne_mode)
    sr = int(result.success)
    os_ = int(sr or bool((near <= episode.success_distance).any()))
    length = episode.geodesic_length
    spl = sr * length / max(tl, length) if max(tl, length) > 0 else float(sr)
    return VLNMetrics(TL=tl, NE=ne, OS=os_, SR=sr, SPL=spl)


def sct(result: EpisodeResult, oracle_time: float, model: MotionModel) -> float:
    """
    Success weighted by completion time, SR·T/max(C, T), where C is the EET of the episode's commands.

    Raises:
        ValueError: If the oracle time `T` is not positive.
    """
    if not oracle_time > 0:
        raise ValueError(f"The oracle time must be positive, got {oracle_time}")
    if not result.success:
        return 0.0
    return oracle_time / max(eet(result.commands, model), oracle_time)


def episode_report(
    result: EpisodeResult,
    grid: OccupancyGrid,
    model: MotionModel,
    oracle_time: Optional[float] = None,
    ne_mode: str = "geodesic",
) -> MetricsReport:
    """The full metrics row for one episode; SCT is left at NaN when no oracle time is available."""
    metrics = vln_metrics(result, grid, ne_mode)
    time = eet(result.commands, model)
    score = sct(result, oracle_time, model) if oracle_time is not None and math.isfinite(oracle_time) else math.nan
    return MetricsReport(
        **asdict(metrics),
        EET=time,
        SCT=score,
        n_commands=issued_commands(result.commands, model.null_epsilon),
        speed=metrics.TL / time if time > 0 else 0.0,
        decision_count=len(result.decisions),
        episode_id=result.episode.id,
    )


@dataclass
class WaypointStatistics:
    mean: float
    std: float
    count: int
    phases: dict[str, float] = field(default_factory=dict)


def waypoint_statistics(predictions: Iterable[Sequence[float]]) -> dict[str, Any]:
    """
    Summary of predicted waypoint distances: overall mean and (population) standard deviation, and the mean over
    each episode phase. A prediction at step k of n falls in the `first` phase when k < 0.25·n, the `last` when
    k ≥ 0.75·n, and the `middle` otherwise.

    Args:
        predictions: Per episode, the predicted distances of its motion decisions in order.

    Returns:
        The statistics as a dictionary, empty when there are no predictions.

    Examples:
        >>> waypoint_statistics([[1.0, 2.0, 3.0]])["mean"]
        2.0
    """
    phases: dict[str, list[float]] = {"first": [], "middle": [], "last": []}
    values = []
    for episode in predictions:
        n = len(episode)
        for k, d in enumerate(episode):
            phase = "first" if k < 0.25 * n else "last" if k >= 0.75 * n else "middle"
            phases[phase].append(d)
            values.append(d)
    if not values:
        return {}
    stats = WaypointStatistics(
        mean=float(np.mean(values)),
        std=float(np.std(values)),
        count=len(values),
        phases={name: float(np.mean(v)) for name, v in phases.items() if v},
    )
    return asdict(stats)


def speed_bins(reports: Sequence[MetricsReport]) -> dict[str, list[str]]:
    """Episode ids of successful episodes split at the median speed (TL/EET), fastest first within each bin."""
    succeeded = sorted((r for r in reports if r.SR), key=lambda r: (-r.speed, r.episode_id))
    half = (len(succeeded) + 1) // 2
    return {"fast": [r.episode_id for r in succeeded[:half]], "slow": [r.episode_id for r in succeeded[half:]]}
