"""Procedural worlds and the start/goal/instruction episodes sampled inside them."""

import argparse
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Optional

import numpy as np
from scipy import ndimage

from waypointnav.common.common import numpy_rng
from waypointnav.common.exceptions import GenerationError, SamplingError
from waypointnav.common.io import config_digest
from waypointnav.modules.world.grid import OccupancyGrid, Point, Pose, polyline_length, shortest_path
from waypointnav.modules.world.instructions import instruction_tokens

WORLD_KINDS = ("rooms", "open")
HOUSE_SCALE_SUCCESS_DISTANCE = 3.0
# placements tried per pillar before it is skipped
_PILLAR_ATTEMPTS = 20


@dataclass(frozen=True)
class WorldParams:
    """
    Parameters of the world generator.

    Args:
        kind: `rooms` carves rectangular rooms joined by L-shaped corridors, `open` frees the whole interior
            and scatters square pillars.
        width_cells: Grid width including the blocked border.
        height_cells: Grid height including the blocked border.
        resolution: Meters per cell.
        n_rooms: Number of rooms (`rooms` only).
        room_min: Smallest room side in cells.
        room_max: Largest room side in cells.
        corridor_width: Corridor width in cells.
        n_pillars: Number of pillars to attempt (`open` only).
        pillar_cells: Pillar side in cells.
    """

    kind: str = "rooms"
    width_cells: int = 48
    height_cells: int = 48
    resolution: float = 0.25
    n_rooms: int = 5
    room_min: int = 8
    room_max: int = 16
    corridor_width: int = 3
    n_pillars: int = 0
    pillar_cells: int = 2

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "WorldParams":
        return cls(kind=args.world_kind, **{f.name: getattr(args, f.name) for f in fields(cls) if f.name != "kind"})

    def validate(self) -> None:
        """
        Raises:
            GenerationError: If no world can be generated with these parameters.
        """
        if self.kind not in WORLD_KINDS:
            raise GenerationError(f"Unknown world kind '{self.kind}', choose from {WORLD_KINDS}")
        if self.width_cells < 3 or self.height_cells < 3:
            raise GenerationError(f"Worlds need at least 3x3 cells, got {self.width_cells}x{self.height_cells}")
        if not self.resolution > 0:
            raise GenerationError(f"Resolution must be positive, got {self.resolution}")
        interior = min(self.width_cells, self.height_cells) - 2
        if self.kind == "rooms":
            if self.n_rooms < 1:
                raise GenerationError(f"n_rooms must be at least 1, got {self.n_rooms}")
            if not 1 <= self.room_min <= self.room_max:
                raise GenerationError(f"Need 1 <= room_min <= room_max, got {self.room_min} and {self.room_max}")
            if self.room_min > interior:
                raise GenerationError(f"room_min {self.room_min} does not fit the {interior}-cell interior")
            if not 1 <= self.corridor_width <= interior:
                raise GenerationError(f"corridor_width must be in [1, {interior}], got {self.corridor_width}")
        if self.n_pillars < 0 or self.pillar_cells < 1:
            raise GenerationError("n_pillars must be non-negative and pillar_cells positive")
        if self.n_pillars and self.pillar_cells >= interior:
            raise GenerationError(f"Pillars of {self.pillar_cells} cells do not fit the {interior}-cell interior")


@dataclass(frozen=True)
class EpisodeParams:
    min_geodesic: float = 2.0
    max_geodesic: float = 8.0
    success_distance: float = 0.5
    max_retries: int = 100

    def __post_init__(self) -> None:
        if not 0 < self.min_geodesic <= self.max_geodesic:
            raise ValueError(f"Need 0 < min_geodesic <= max_geodesic, got {self.min_geodesic}, {self.max_geodesic}")
        if not self.success_distance > 0:
            raise ValueError(f"success_distance must be positive, got {self.success_distance}")
        if self.max_retries < 1:
            raise ValueError(f"max_retries must be at least 1, got {self.max_retries}")

    @classmethod
    def house_scale(cls, **kwargs: Any) -> "EpisodeParams":
        """Episode parameters with the 3 m success radius used for photorealistic house-scale scenes."""
        return cls(**{**kwargs, "success_distance": HOUSE_SCALE_SUCCESS_DISTANCE})

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "EpisodeParams":
        kwargs = {f.name: getattr(args, f.name) for f in fields(cls)}
        return cls.house_scale(**kwargs) if args.house_scale else cls(**kwargs)


@dataclass(frozen=True)
class Episode:
    id: str
    start: Pose
    goal: Point
    shortest_path: tuple[Point, ...]
    geodesic_length: float
    instruction: tuple[int, ...]
    success_distance: float


def world_digest(world_params: WorldParams, episode_params: EpisodeParams) -> str:
    return config_digest({"world": asdict(world_params), "episodes": asdict(episode_params)})


def _single_component(free: np.ndarray) -> bool:
    # diagonal moves need a free orthogonal neighbour, so 4-connectivity matches the navigation graph
    _, n_components = ndimage.label(free)
    return n_components == 1


def _carve_rooms(blocked: np.ndarray, params: WorldParams, rng: np.random.Generator) -> None:
    height, width = blocked.shape
    centers = []
    for _ in range(params.n_rooms):
        h = int(rng.integers(params.room_min, min(params.room_max, height - 2) + 1))
        w = int(rng.integers(params.room_min, min(params.room_max, width - 2) + 1))
        top = int(rng.integers(1, height - 1 - h + 1))
        left = int(rng.integers(1, width - 1 - w + 1))
        blocked[top : top + h, left : left + w] = False
        centers.append((top + h // 2, left + w // 2))
    half = params.corridor_width // 2
    for (i0, j0), (i1, j1) in zip(centers[:-1], centers[1:]):
        corner = (i0, j1) if rng.integers(2) else (i1, j0)
        for (a_i, a_j), (b_i, b_j) in (((i0, j0), corner), (corner, (i1, j1))):
            rows = slice(max(1, min(a_i, b_i) - half), min(height - 1, max(a_i, b_i) - half + params.corridor_width))
            cols = slice(max(1, min(a_j, b_j) - half), min(width - 1, max(a_j, b_j) - half + params.corridor_width))
            blocked[rows, cols] = False


def _place_pillars(blocked: np.ndarray, params: WorldParams, rng: np.random.Generator) -> None:
    height, width = blocked.shape
    side = params.pillar_cells
    for _ in range(params.n_pillars):
        for _ in range(_PILLAR_ATTEMPTS):
            top = int(rng.integers(1, height - 1 - side + 1))
            left = int(rng.integers(1, width - 1 - side + 1))
            candidate = blocked.copy()
            candidate[top : top + side, left : left + side] = True
            if (~candidate).any() and _single_component(~candidate):
                blocked[...] = candidate
                break


def generate_world(seed: int, params: Optional[WorldParams] = None) -> OccupancyGrid:
    """
    Generate a closed world whose free space is a single connected component.

    Args:
        seed: The world seed; the same seed and parameters always give the same grid.
        params: Generator parameters, defaults to `WorldParams()`.

    Returns:
        The generated occupancy grid.

    Raises:
        GenerationError: If the parameters are infeasible.
    """
    params = params or WorldParams()
    params.validate()
    rng = numpy_rng(seed)
    blocked = np.ones((params.height_cells, params.width_cells), dtype=bool)
    if params.kind == "rooms":
        _carve_rooms(blocked, params, rng)
    else:
        blocked[1:-1, 1:-1] = False
    _place_pillars(blocked, params, rng)
    if not _single_component(~blocked):
        raise GenerationError(f"World {seed} has disconnected free space")
    return OccupancyGrid(blocked, params.resolution)


def generate_episode(
    grid: OccupancyGrid, seed: int, params: Optional[EpisodeParams] = None, episode_id: Optional[str] = None
) -> Episode:
    """
    Sample a start/goal pair at cell centers whose shortest path length lies within the configured range, and
    template an instruction from the path's turns. The start heading faces the first path segment.

    Args:
        grid: A connected world.
        seed: The episode seed.
        params: Sampling parameters, defaults to `EpisodeParams()`.
        episode_id: Identifier of the episode, defaults to `ep-<seed>`.

    Returns:
        The episode.

    Raises:
        SamplingError: If no valid pair is found within `params.max_retries` attempts.
    """
    params = params or EpisodeParams()
    rng = numpy_rng(seed)
    free = grid.free_cells
    for _ in range(params.max_retries):
        start_cell = tuple(free[rng.integers(len(free))])
        distances = grid._dijkstra(start_cell)[0]
        # cell-graph distances upper bound the pulled path, which the 8-connected overestimate keeps close
        reachable = distances[free[:, 0], free[:, 1]]
        candidates = free[(reachable >= params.min_geodesic) & (reachable <= params.max_geodesic * 1.1)]
        if not len(candidates):
            continue
        start = grid.cell_center(start_cell)
        goal = grid.cell_center(candidates[rng.integers(len(candidates))])
        path = shortest_path(grid, start, goal)
        length = polyline_length(path)
        if not params.min_geodesic <= length <= params.max_geodesic:
            continue
        heading = math.atan2(path[1][1] - path[0][1], path[1][0] - path[0][0])
        return Episode(
            id=episode_id if episode_id is not None else f"ep-{seed}",
            start=Pose(*start, heading),
            goal=goal,
            shortest_path=tuple(path),
            geodesic_length=length,
            instruction=instruction_tokens(path, heading),
            success_distance=params.success_distance,
        )
    raise SamplingError(
        f"No start/goal pair with a path length in [{params.min_geodesic}, {params.max_geodesic}] "
        f"found after {params.max_retries} attempts"
    )
