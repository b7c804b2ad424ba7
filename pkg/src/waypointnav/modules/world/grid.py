"""Occupancy grids, poses and the geometric queries made against them: ray casts, panoramic range scans,
line-of-sight checks and 8-connected geodesic distances."""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from waypointnav.common.constants import N_SECTORS, SECTOR_WIDTH
from waypointnav.common.exceptions import InvalidPoseError

Point = tuple[float, float]
Cell = tuple[int, int]

TWO_PI = 2 * math.pi
MIN_READING = 1e-9
_FIELD_CACHE_SIZE = 256


def wrap_heading(angle: float) -> float:
    """Wrap an angle in radians onto [0, 2π)."""
    wrapped = math.fmod(angle, TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    return 0.0 if wrapped >= TWO_PI else wrapped


def wrap_signed(angle: float) -> float:
    """Wrap an angle in radians onto (−π, π]."""
    wrapped = wrap_heading(angle)
    return wrapped - TWO_PI if wrapped > math.pi else wrapped


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", wrap_heading(float(self.heading)))

    @property
    def position(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """
    A closed 2D world of square cells. Row `i` spans y ∈ [i·res, (i+1)·res) and column `j` spans
    x ∈ [j·res, (j+1)·res).

    Args:
        blocked: Boolean array of shape (height_cells, width_cells), True where the cell is an obstacle.
        resolution: Meters per cell.

    Raises:
        ValueError: If the boundary is not fully blocked, there are no free cells or the resolution is not positive.
    """

    blocked: np.ndarray
    resolution: float
    _fields: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        blocked = np.array(self.blocked, dtype=bool)
        if blocked.ndim != 2 or min(blocked.shape) < 3:
            raise ValueError(f"An occupancy grid needs at least 3x3 cells, got shape {blocked.shape}")
        if not self.resolution > 0:
            raise ValueError(f"Resolution must be positive, got {self.resolution}")
        if not (blocked[0].all() and blocked[-1].all() and blocked[:, 0].all() and blocked[:, -1].all()):
            raise ValueError("All boundary cells of an occupancy grid must be blocked")
        if blocked.all():
            raise ValueError("An occupancy grid needs at least one free cell")
        blocked.setflags(write=False)
        object.__setattr__(self, "blocked", blocked)
        object.__setattr__(self, "resolution", float(self.resolution))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return self.resolution == other.resolution and np.array_equal(self.blocked, other.blocked)

    def __hash__(self) -> int:
        return hash((self.resolution, self.blocked.shape, self.blocked.tobytes()))

    @property
    def height_cells(self) -> int:
        return self.blocked.shape[0]

    @property
    def width_cells(self) -> int:
        return self.blocked.shape[1]

    @cached_property
    def free_cells(self) -> np.ndarray:
        """(n, 2) array of the (row, column) indices of free cells in row-major order."""
        return np.argwhere(~self.blocked)

    def cell_of(self, point: Sequence[float]) -> Cell:
        return (int(math.floor(point[1] / self.resolution)), int(math.floor(point[0] / self.resolution)))

    def cell_center(self, cell: Sequence[int]) -> Point:
        return ((cell[1] + 0.5) * self.resolution, (cell[0] + 0.5) * self.resolution)

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height_cells and 0 <= cell[1] < self.width_cells

    def is_free(self, point: Sequence[float]) -> bool:
        cell = self.cell_of(point)
        return self.in_bounds(cell) and not self.blocked[cell]

    def check_free(self, point: Sequence[float], what: str = "point") -> None:
        """
        Raises:
            InvalidPoseError: If `point` lies outside the grid or in a blocked cell.
        """
        if not (math.isfinite(point[0]) and math.isfinite(point[1]) and self.is_free(point)):
            raise InvalidPoseError(f"The {what} ({point[0]:.4f}, {point[1]:.4f}) does not lie in a free cell")

    def cell_index(self, cell: Cell) -> int:
        return cell[0] * self.width_cells + cell[1]

    @cached_property
    def graph(self) -> csr_matrix:
        """The 8-connected free-cell graph; diagonal moves may not squeeze between two blocked cells."""
        free = ~self.blocked
        height, width = free.shape
        index = np.arange(height * width).reshape(height, width)
        rows, cols, weights = [], [], []
        for di, dj in ((0, 1), (1, 0), (1, 1), (1, -1)):
            i1, j0, j1 = height - di, max(0, -dj), width - max(0, dj)
            ok = free[:i1, j0:j1] & free[di : i1 + di, j0 + dj : j1 + dj]
            if di and dj:
                ok &= free[di : i1 + di, j0:j1] | free[:i1, j0 + dj : j1 + dj]
            src = index[:i1, j0:j1][ok]
            dst = index[di : i1 + di, j0 + dj : j1 + dj][ok]
            cost = self.resolution * (math.sqrt(2) if di and dj else 1.0)
            rows.extend((src, dst))
            cols.extend((dst, src))
            weights.append(np.full(2 * len(src), cost))
        return csr_matrix(
            (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))),
            shape=(height * width, height * width),
        )

    def _dijkstra(self, cell: Cell) -> tuple[np.ndarray, np.ndarray]:
        source = self.cell_index(cell)
        if source not in self._fields:
            if len(self._fields) >= _FIELD_CACHE_SIZE:
                self._fields.clear()
            distances, predecessors = dijkstra(self.graph, directed=True, indices=source, return_predecessors=True)
            self._fields[source] = (distances.reshape(self.blocked.shape), predecessors)
        return self._fields[source]


@dataclass(frozen=True)
class RangeScan:
    """Twelve per-sector range readings; sector `i` is centered at i·30° counter-clockwise from the heading."""

    readings: np.ndarray
    max_range: float

    @property
    def sector_centers(self) -> np.ndarray:
        return np.arange(N_SECTORS) * SECTOR_WIDTH


def raycast_many(grid: OccupancyGrid, origin: Sequence[float], angles: Iterable[float], max_range: float) -> np.ndarray:
    """
    Cast rays from `origin` at each of the absolute `angles` simultaneously, walking the grid cell by cell
    (Amanatides-Woo traversal) until a blocked cell is entered or `max_range` is exceeded.

    Returns:
        The distance along each ray to the first blocked cell boundary, clipped to (0, max_range].

    Raises:
        InvalidPoseError: If `origin` is not in a free cell.
    """
    grid.check_free(origin, "ray origin")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    ux, uy = origin[0] / grid.resolution, origin[1] / grid.resolution
    limit = max_range / grid.resolution
    dx, dy = np.cos(angles), np.sin(angles)
    ix = np.full(angles.shape, math.floor(ux), dtype=np.int64)
    iy = np.full(angles.shape, math.floor(uy), dtype=np.int64)
    step_x = np.where(dx > 0, 1, -1)
    step_y = np.where(dy > 0, 1, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta_x = np.where(dx != 0, 1.0 / np.abs(dx), np.inf)
        delta_y = np.where(dy != 0, 1.0 / np.abs(dy), np.inf)
        t_x = np.where(dx > 0, (ix + 1 - ux) / dx, np.where(dx < 0, (ux - ix) / -dx, np.inf))
        t_y = np.where(dy > 0, (iy + 1 - uy) / dy, np.where(dy < 0, (uy - iy) / -dy, np.inf))
    distances = np.full(angles.shape, limit)
    active = np.ones(angles.shape, dtype=bool)
    while active.any():
        along_x = t_x <= t_y
        t = np.where(along_x, t_x, t_y)
        # a ray through a cell corner must clear both cells sharing that corner
        corner = active & (t_x == t_y) & _blocked_at(grid, iy + step_y, ix)
        move_x, move_y = active & along_x, active & ~along_x
        ix = np.where(move_x, ix + step_x, ix)
        iy = np.where(move_y, iy + step_y, iy)
        t_x = np.where(move_x, t_x + delta_x, t_x)
        t_y = np.where(move_y, t_y + delta_y, t_y)
        hit = active & (corner | _blocked_at(grid, iy, ix)) & (t < limit)
        distances = np.where(hit, t, distances)
        active &= ~hit & (t < limit)
    return np.clip(distances * grid.resolution, MIN_READING, max_range)


def _blocked_at(grid: OccupancyGrid, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    inside = (cols >= 0) & (cols < grid.width_cells) & (rows >= 0) & (rows < grid.height_cells)
    return ~inside | grid.blocked[rows.clip(0, grid.height_cells - 1), cols.clip(0, grid.width_cells - 1)]


def raycast(grid: OccupancyGrid, origin: Sequence[float], angle: float, max_range: float = 10.0) -> float:
    """
    Distance from `origin` along the absolute `angle` to the first blocked cell boundary.

    Args:
        grid: The world.
        origin: The (x, y) start of the ray, which must lie in free space.
        angle: The ray direction in radians, counter-clockwise from the +x axis.
        max_range: The sensor range to clip the result to.

    Returns:
        The distance in meters, in (0, max_range].
    """
    return float(raycast_many(grid, origin, [angle], max_range)[0])


def panorama_scan(grid: OccupancyGrid, pose: Pose, rays_per_sector: int = 5, max_range: float = 10.0) -> RangeScan:
    """
    Panoramic range scan: sector `i` reads the minimum of `rays_per_sector` evenly spaced rays across the
    30° arc centered at `pose.heading + i·30°`.
    """
    if rays_per_sector < 1:
        raise ValueError(f"rays_per_sector must be at least 1, got {rays_per_sector}")
    offsets = (np.arange(rays_per_sector) + 0.5) / rays_per_sector * SECTOR_WIDTH - SECTOR_WIDTH / 2
    relative = (np.arange(N_SECTORS)[:, None] * SECTOR_WIDTH + offsets[None, :]).ravel()
    readings = raycast_many(grid, pose.position, pose.heading + relative, max_range)
    return RangeScan(readings.reshape(N_SECTORS, rays_per_sector).min(axis=1), float(max_range))


def line_of_sight(grid: OccupancyGrid, a: Sequence[float], b: Sequence[float]) -> bool:
    """Whether the straight segment from `a` to `b` crosses only free cells."""
    length = math.dist(a, b)
    if not grid.is_free(b):
        return False
    if length == 0.0:
        return grid.is_free(a)
    bearing = math.atan2(b[1] - a[1], b[0] - a[0])
    return raycast(grid, a, bearing, length + grid.resolution) >= length - 1e-9


def visible_from(grid: OccupancyGrid, a: Sequence[float], targets: np.ndarray) -> np.ndarray:
    """Vectorised `line_of_sight` from `a` to each row of the (n, 2) array `targets` (all in free cells)."""
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    offsets = targets - np.asarray(a, dtype=float)
    lengths = np.hypot(offsets[:, 0], offsets[:, 1])
    if len(targets) == 0:
        return np.zeros(0, dtype=bool)
    reach = raycast_many(grid, a, np.arctan2(offsets[:, 1], offsets[:, 0]), float(lengths.max()) + grid.resolution)
    return reach >= lengths - 1e-9


def distance_field(grid: OccupancyGrid, point: Sequence[float]) -> np.ndarray:
    """
    Geodesic distances from the cell containing `point` to every cell (∞ for blocked or disconnected cells).

    Raises:
        InvalidPoseError: If `point` is not in a free cell.
    """
    grid.check_free(point)
    return grid._dijkstra(grid.cell_of(point))[0]


def geodesic_distance(grid: OccupancyGrid, a: Sequence[float], b: Sequence[float]) -> float:
    """
    Shortest-path length between the cells containing `a` and `b` over the 8-connected free-cell graph.

    Returns:
        The distance in meters, `math.inf` if the cells are disconnected.

    Raises:
        InvalidPoseError: If either endpoint is in a blocked cell.
    """
    grid.check_free(a)
    grid.check_free(b)
    source, target = sorted((grid.cell_of(a), grid.cell_of(b)))
    return float(grid._dijkstra(source)[0][target])


def cell_path(grid: OccupancyGrid, a: Sequence[float], b: Sequence[float]) -> list[Cell]:
    """The sequence of cells on a shortest 8-connected path from `a`'s cell to `b`'s cell, empty if disconnected."""
    grid.check_free(a)
    grid.check_free(b)
    source, target = grid.cell_of(a), grid.cell_of(b)
    distances, predecessors = grid._dijkstra(source)
    if not math.isfinite(distances[target]):
        return []
    cells, node = [], grid.cell_index(target)
    while node >= 0:
        cells.append(divmod(int(node), grid.width_cells))
        node = predecessors[node]
    return cells[::-1]


def shortest_path(grid: OccupancyGrid, a: Sequence[float], b: Sequence[float]) -> list[Point]:
    """
    A shortest obstacle-free polyline from `a` to `b`: the Dijkstra cell path through cell centers,
    shortened by keeping only the vertices that break line of sight.
    """
    cells = cell_path(grid, a, b)
    if not cells:
        return []
    # diagonal steps that graze a blocked cell are walked around through the free orthogonal neighbour
    expanded = cells[:1]
    for (i0, j0), (i1, j1) in zip(cells[:-1], cells[1:]):
        if i0 != i1 and j0 != j1 and (grid.blocked[i0, j1] or grid.blocked[i1, j0]):
            expanded.append((i0, j1) if not grid.blocked[i0, j1] else (i1, j0))
        expanded.append((i1, j1))
    cells = expanded
    points = [tuple(map(float, a))] + [grid.cell_center(c) for c in cells[1:-1]] + [tuple(map(float, b))]
    polyline, anchor = [points[0]], 0
    while anchor < len(points) - 1:
        visible = visible_from(grid, points[anchor], np.array(points[anchor + 1 :]))
        reach = anchor + 1 + int(np.flatnonzero(visible).max(initial=0))
        polyline.append(points[reach])
        anchor = reach
    return polyline


def polyline_length(points: Sequence[Sequence[float]]) -> float:
    return float(sum(math.dist(p, q) for p, q in zip(points[:-1], points[1:])))
