import math

import numpy as np
import pytest

from waypointnav.common.exceptions import InvalidPoseError, PlannerIncompleteError
from waypointnav.modules.metrics.motion import MotionModel, rotate_time, translate_time
from waypointnav.modules.metrics.planners import (
    RRTParams,
    edge_cost,
    geodesic_nearest,
    lattice_discretization_bound,
    minimal_time_lattice,
    minimal_time_rrt,
)
from waypointnav.modules.world.generation import EpisodeParams, WorldParams, generate_episode, generate_world
from waypointnav.modules.world.grid import OccupancyGrid, Pose

MODEL = MotionModel()


@pytest.fixture
def split_grid() -> OccupancyGrid:
    blocked = np.ones((12, 12), dtype=bool)
    blocked[1:-1, 1:-1] = False
    blocked[:, 6] = True
    return OccupancyGrid(blocked, 0.25)


def test_edge_cost() -> None:
    assert edge_cost(MODEL, 0.0, (0.0, 0.0), (1.0, 0.0)) == pytest.approx(4.562)
    assert edge_cost(MODEL, 0.0, (0.0, 0.0), (0.0, 1.0)) == pytest.approx(14.8498 + 4.562)


def test_discretization_bound() -> None:
    per_vertex = rotate_time(MODEL, 180.0) - rotate_time(MODEL, 150.0)
    assert per_vertex > rotate_time(MODEL, 30.0)
    assert lattice_discretization_bound(MODEL, 1) == 0.0
    assert lattice_discretization_bound(MODEL, 3) == pytest.approx(2 * per_vertex)


def test_lattice_aligned_corridor(corridor_grid) -> None:
    oracle = minimal_time_lattice(corridor_grid, Pose(0.375, 0.375, 0.0), (2.375, 0.375), MODEL)
    assert oracle.T == pytest.approx(8.762)
    assert oracle.planner == "lattice_dijkstra"
    assert oracle.n_segments == 1


def test_lattice_turns_once_for_an_off_axis_goal(empty_grid) -> None:
    oracle = minimal_time_lattice(empty_grid, Pose(1.375, 1.375, 0.0), (1.375, 2.375), MODEL)
    assert oracle.T == pytest.approx(19.4118)
    assert oracle.waypoints == ((1.375, 1.375), (1.375, 2.375))


def test_lattice_edge_cases(empty_grid, split_grid) -> None:
    assert minimal_time_lattice(empty_grid, Pose(1.3, 1.3, 0.0), (1.45, 1.45), MODEL).T == 0.0
    assert minimal_time_lattice(split_grid, Pose(0.5, 0.5, 0.0), (2.5, 2.5), MODEL).T == math.inf
    with pytest.raises(InvalidPoseError):
        minimal_time_lattice(split_grid, Pose(0.5, 0.5, 0.0), (1.625, 1.0), MODEL)


def test_lattice_is_deterministic(wall_grid) -> None:
    start, goal = Pose(1.0, 1.0, 0.3), (3.5, 1.0)
    first = minimal_time_lattice(wall_grid, start, goal, MODEL)
    assert minimal_time_lattice(wall_grid, start, goal, MODEL) == first
    assert first.n_segments >= 2


def test_rrt_aligned_goal_is_a_single_edge(empty_grid) -> None:
    oracle = minimal_time_rrt(empty_grid, Pose(0.625, 1.375, 0.0), (2.375, 1.375), MODEL, params=RRTParams(300))
    assert oracle.T == pytest.approx(translate_time(MODEL, 1.75))
    assert oracle.planner == "rrt_star"


def test_rrt_goal_behind_is_no_worse_than_a_half_turn(empty_grid) -> None:
    oracle = minimal_time_rrt(empty_grid, Pose(2.375, 1.375, 0.0), (0.625, 1.375), MODEL, params=RRTParams(300))
    assert oracle.T <= rotate_time(MODEL, 180.0) + translate_time(MODEL, 1.75) + 1e-9


def test_rrt_history_never_increases(wall_grid) -> None:
    oracle = minimal_time_rrt(wall_grid, Pose(1.0, 1.0, 0.0), (3.5, 1.0), MODEL, seed=4, params=RRTParams(600))
    history = np.array(oracle.history)
    finite = history[np.isfinite(history)]
    assert len(history) == 600
    assert (np.diff(finite) <= 1e-9).all()
    assert oracle.T == pytest.approx(finite[-1])


def test_rrt_is_reproducible(wall_grid) -> None:
    def plan(seed):
        return minimal_time_rrt(wall_grid, Pose(1.0, 1.0, 0.0), (3.5, 1.0), MODEL, seed=seed, params=RRTParams(300))

    assert plan(1) == plan(1)


def test_rrt_reports_partial_cost_when_incomplete(wall_grid) -> None:
    with pytest.raises(PlannerIncompleteError) as e:
        minimal_time_rrt(wall_grid, Pose(1.0, 1.0, 0.0), (3.5, 1.0), MODEL, params=RRTParams(0))
    assert 0.0 < e.value.best_partial_cost < math.inf


def test_rrt_same_cell_is_free(empty_grid) -> None:
    assert minimal_time_rrt(empty_grid, Pose(1.3, 1.3, 0.0), (1.45, 1.45), MODEL).T == 0.0


def test_geodesic_nearest_ignores_nodes_behind_a_wall(wall_grid) -> None:
    nodes = np.array([[2.625, 1.0], [1.0, 1.0]])
    assert np.argmin(np.hypot(*(nodes - (2.125, 1.0)).T)) == 0
    assert geodesic_nearest(wall_grid, (2.125, 1.0), nodes) == 1


def test_rrt_without_geodesic_bias_still_connects(wall_grid) -> None:
    params = RRTParams(geodesic_bias=0.0)
    result = minimal_time_rrt(wall_grid, Pose(1.0, 1.0, 0.0), (3.5, 1.0), MODEL, seed=3, params=params)
    assert math.isfinite(result.T)
    assert result.n_segments >= 2


def _random_maps(n: int):
    params = WorldParams(kind="open", width_cells=14, height_cells=14, n_pillars=3)
    for seed in range(n):
        grid = generate_world(100 + seed, params)
        episode = generate_episode(grid, seed, EpisodeParams(min_geodesic=1.5, max_geodesic=4.0))
        yield grid, episode.start, episode.goal


@pytest.mark.parametrize("index", range(3))
def test_rrt_never_beats_the_lattice_by_more_than_its_bound(index) -> None:
    grid, start, goal = list(_random_maps(3))[index]
    lattice = minimal_time_lattice(grid, start, goal, MODEL)
    rrt = minimal_time_rrt(grid, start, goal, MODEL, seed=index, params=RRTParams(800))
    assert rrt.T >= lattice.T - lattice_discretization_bound(MODEL, rrt.n_segments) - 1e-9


@pytest.mark.slow
def test_rrt_is_close_to_the_lattice_optimum() -> None:
    for index, (grid, start, goal) in enumerate(_random_maps(20)):
        lattice = minimal_time_lattice(grid, start, goal, MODEL)
        rrt = minimal_time_rrt(grid, start, goal, MODEL, seed=index, params=RRTParams(3000))
        assert rrt.T <= 1.05 * lattice.T + 1e-9
        assert rrt.T >= lattice.T - lattice_discretization_bound(MODEL, rrt.n_segments) - 1e-9
