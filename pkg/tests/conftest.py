import argparse
from pathlib import Path

import numpy as np
import torch
import pytest

from waypointnav.modules.policy.network import PolicyConfig, WaypointPolicy
from waypointnav.modules.world.generation import Episode, EpisodeParams, WorldParams, generate_episode, generate_world
from waypointnav.modules.world.grid import OccupancyGrid, Pose, polyline_length, shortest_path
from waypointnav.modules.world.instructions import instruction_tokens


def open_grid(width: int = 12, height: int = 12, resolution: float = 0.25) -> OccupancyGrid:
    blocked = np.ones((height, width), dtype=bool)
    blocked[1:-1, 1:-1] = False
    return OccupancyGrid(blocked, resolution)


def make_episode(
    grid: OccupancyGrid, start: Pose, goal: tuple, success_distance: float = 0.5, id: str = "ep"
) -> Episode:
    path = shortest_path(grid, start.position, goal)
    return Episode(
        id=id,
        start=start,
        goal=goal,
        shortest_path=tuple(path),
        geodesic_length=polyline_length(path),
        instruction=instruction_tokens(path, start.heading),
        success_distance=success_distance,
    )


@pytest.fixture
def experiment_dir(tmp_path) -> Path:
    experiment_dir = tmp_path / "experiment"
    experiment_dir.mkdir()
    return experiment_dir


@pytest.fixture
def empty_grid() -> OccupancyGrid:
    """A 3 m x 3 m room inside a one-cell wall."""
    return open_grid()


@pytest.fixture
def corridor_grid() -> OccupancyGrid:
    """A straight 1-cell-wide corridor along +x, 4 m long at 0.25 m per cell."""
    blocked = np.ones((3, 18), dtype=bool)
    blocked[1, 1:-1] = False
    return OccupancyGrid(blocked, 0.25)


@pytest.fixture
def wall_grid() -> OccupancyGrid:
    """A 4 m x 4 m room split by a wall with a single gap at the top."""
    blocked = np.ones((18, 18), dtype=bool)
    blocked[1:-1, 1:-1] = False
    blocked[1:-4, 9] = True
    return OccupancyGrid(blocked, 0.25)


@pytest.fixture
def empty_episode(empty_grid) -> Episode:
    return make_episode(empty_grid, Pose(0.625, 0.625, 0.0), (2.375, 0.625))


@pytest.fixture
def small_world_params() -> WorldParams:
    return WorldParams(kind="open", width_cells=16, height_cells=16, n_pillars=2)


@pytest.fixture
def small_episode_params() -> EpisodeParams:
    return EpisodeParams(min_geodesic=1.0, max_geodesic=2.5)


@pytest.fixture
def small_world(small_world_params, small_episode_params) -> tuple[OccupancyGrid, list[Episode]]:
    grid = generate_world(3, small_world_params)
    return grid, [generate_episode(grid, s, small_episode_params, f"w3-e{s}") for s in range(3)]


@pytest.fixture
def small_policy_config() -> PolicyConfig:
    return PolicyConfig(sector_dim=8, h_vis_dim=12, h_a_dim=12, embedding_dim=6)


@pytest.fixture
def small_policy(small_policy_config) -> WaypointPolicy:
    torch.manual_seed(0)
    return WaypointPolicy(small_policy_config)


@pytest.fixture
def args() -> argparse.Namespace:
    args = argparse.Namespace()
    args.module_handover = {}
    args.modules_to_run = []
    args.force = False
    args.out = None
    return args


@pytest.fixture
def grid_factory():
    return open_grid


@pytest.fixture
def episode_factory():
    return make_episode
