import math

import numpy as np
import pytest

from waypointnav.common.exceptions import InvalidPoseError
from waypointnav.modules.world.grid import (
    OccupancyGrid,
    Pose,
    distance_field,
    geodesic_distance,
    line_of_sight,
    panorama_scan,
    polyline_length,
    raycast,
    shortest_path,
    wrap_heading,
    wrap_signed,
)


@pytest.fixture
def room_10m() -> OccupancyGrid:
    blocked = np.ones((22, 22), dtype=bool)
    blocked[1:-1, 1:-1] = False
    return OccupancyGrid(blocked, 0.5)


@pytest.fixture
def l_corridor() -> OccupancyGrid:
    blocked = np.ones((5, 8), dtype=bool)
    blocked[1, 1:7] = False
    blocked[1:4, 6] = False
    return OccupancyGrid(blocked, 1.0)


def test_grid_requires_closed_boundary() -> None:
    blocked = np.ones((4, 4), dtype=bool)
    blocked[1:3, 1:3] = False
    blocked[0, 1] = False
    with pytest.raises(ValueError, match="boundary cells"):
        OccupancyGrid(blocked, 1.0)


def test_grid_requires_free_cell_and_positive_resolution() -> None:
    with pytest.raises(ValueError, match="at least one free cell"):
        OccupancyGrid(np.ones((3, 3), dtype=bool), 1.0)
    blocked = np.ones((3, 3), dtype=bool)
    blocked[1, 1] = False
    with pytest.raises(ValueError, match="Resolution must be positive"):
        OccupancyGrid(blocked, 0.0)


def test_grid_is_immutable(empty_grid) -> None:
    with pytest.raises(ValueError):
        empty_grid.blocked[1, 1] = True


def test_pose_heading_wraps() -> None:
    assert Pose(0.0, 0.0, -math.pi / 2).heading == pytest.approx(3 * math.pi / 2)
    assert Pose(0.0, 0.0, 2 * math.pi).heading == 0.0
    assert wrap_signed(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert 0.0 <= wrap_heading(-1e-18) < 2 * math.pi


def test_raycast_open_room(room_10m) -> None:
    assert raycast(room_10m, (5.5, 5.5), 0.0) == pytest.approx(5.0)
    assert raycast(room_10m, (5.5, 5.5), math.pi / 2) == pytest.approx(5.0)


def test_raycast_adjacent_to_wall(room_10m) -> None:
    distance = raycast(room_10m, (0.6, 5.5), math.pi)
    assert distance == pytest.approx(0.1)
    assert distance < room_10m.resolution


def test_raycast_down_corridor_arm(l_corridor) -> None:
    assert raycast(l_corridor, (1.5, 1.5), 0.0) == pytest.approx(5.5)
    assert raycast(l_corridor, (6.5, 1.5), math.pi / 2) == pytest.approx(2.5)


def test_raycast_clips_to_max_range(room_10m) -> None:
    assert raycast(room_10m, (5.5, 5.5), 0.0, max_range=2.0) == 2.0


def test_raycast_from_blocked_origin(room_10m) -> None:
    with pytest.raises(InvalidPoseError, match="ray origin"):
        raycast(room_10m, (0.2, 0.2), 0.0)


def test_panorama_scan_in_circular_room() -> None:
    resolution = 0.1
    centers = (np.arange(80) + 0.5) * resolution
    xs, ys = np.meshgrid(centers, centers)
    blocked = np.hypot(xs - 4.0, ys - 4.0) > 3.0
    grid = OccupancyGrid(blocked, resolution)

    scan = panorama_scan(grid, Pose(4.0, 4.0, 0.3))

    assert scan.readings.shape == (12,)
    assert scan.readings == pytest.approx(np.full(12, 3.0), abs=resolution)


def test_panorama_scan_rotation_equivariance(wall_grid) -> None:
    pose = Pose(1.13, 2.71, 0.2)
    base = panorama_scan(wall_grid, pose).readings
    for k in range(1, 4):
        rotated = panorama_scan(wall_grid, Pose(pose.x, pose.y, pose.heading + k * math.radians(30))).readings
        assert rotated == pytest.approx(np.roll(base, -k), abs=1e-9)


def test_panorama_scan_readings_in_range(wall_grid) -> None:
    scan = panorama_scan(wall_grid, Pose(0.4, 0.4, 1.0), max_range=2.0)
    assert np.all(scan.readings > 0)
    assert np.all(scan.readings <= 2.0)
    assert scan.sector_centers == pytest.approx(np.arange(12) * math.radians(30))


def test_panorama_scan_sector_is_minimum_of_rays(wall_grid) -> None:
    pose = Pose(3.1, 1.7, 0.0)
    scan = panorama_scan(wall_grid, pose, rays_per_sector=5)
    dense = [raycast(wall_grid, pose.position, math.radians(a)) for a in (-12, -6, 0, 6, 12)]
    assert scan.readings[0] == pytest.approx(min(dense))


def test_geodesic_identity_and_straight_line(empty_grid) -> None:
    a, b = empty_grid.cell_center((2, 2)), empty_grid.cell_center((2, 9))
    assert geodesic_distance(empty_grid, a, a) == 0.0
    assert geodesic_distance(empty_grid, a, b) == pytest.approx(math.dist(a, b))


def test_geodesic_open_room_overestimate_bound(empty_grid) -> None:
    a, b = empty_grid.cell_center((1, 1)), empty_grid.cell_center((3, 10))
    euclidean = math.dist(a, b)
    assert euclidean <= geodesic_distance(empty_grid, a, b) <= 1.083 * euclidean


def test_geodesic_around_blocked_center() -> None:
    blocked = np.ones((5, 5), dtype=bool)
    blocked[1:4, 1:4] = False
    blocked[2, 2] = True
    grid = OccupancyGrid(blocked, 1.0)
    assert geodesic_distance(grid, (1.5, 1.5), (3.5, 3.5)) == pytest.approx(2 + math.sqrt(2))


def test_geodesic_disconnected_is_infinite() -> None:
    blocked = np.ones((3, 6), dtype=bool)
    blocked[1, 1:3] = False
    blocked[1, 4] = False
    grid = OccupancyGrid(blocked, 1.0)
    assert geodesic_distance(grid, (1.5, 1.5), (4.5, 1.5)) == math.inf
    assert shortest_path(grid, (1.5, 1.5), (4.5, 1.5)) == []


def test_geodesic_blocked_endpoint(empty_grid) -> None:
    with pytest.raises(InvalidPoseError, match="does not lie in a free cell"):
        geodesic_distance(empty_grid, (0.1, 0.1), (1.0, 1.0))


def test_geodesic_symmetric_and_triangle_inequality(wall_grid) -> None:
    rng = np.random.default_rng(0)
    free = wall_grid.free_cells
    for _ in range(30):
        a, b, c = (wall_grid.cell_center(free[i]) for i in rng.integers(len(free), size=3))
        ab, bc, ac = (geodesic_distance(wall_grid, *p) for p in ((a, b), (b, c), (a, c)))
        assert ab == pytest.approx(geodesic_distance(wall_grid, b, a))
        assert ac <= ab + bc + 1e-9


def test_distance_field_matches_geodesic(wall_grid) -> None:
    a, b = (0.375, 0.375), (3.625, 0.375)
    field = distance_field(wall_grid, a)
    assert field.shape == wall_grid.blocked.shape
    assert field[wall_grid.cell_of(b)] == pytest.approx(geodesic_distance(wall_grid, a, b))
    assert field[0, 0] == math.inf


def test_shortest_path_goes_through_gap(wall_grid) -> None:
    a, b = (0.375, 0.375), (3.625, 0.375)
    path = shortest_path(wall_grid, a, b)
    assert path[0] == a and path[-1] == b
    assert max(p[1] for p in path) > 3.25
    assert all(line_of_sight(wall_grid, p, q) for p, q in zip(path[:-1], path[1:]))
    assert math.dist(a, b) < polyline_length(path) <= geodesic_distance(wall_grid, a, b) + 1e-9


def test_line_of_sight(wall_grid) -> None:
    assert line_of_sight(wall_grid, (0.375, 0.375), (0.375, 3.625))
    assert not line_of_sight(wall_grid, (0.375, 0.375), (3.625, 0.375))
