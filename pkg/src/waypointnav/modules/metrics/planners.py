"""
Minimal-time oracles under point-turn dynamics: a deterministic Dijkstra search over a heading lattice and a
sampling-based RRT* planner whose costs come from the motion model.
"""

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from waypointnav.common.common import numpy_rng
from waypointnav.common.exceptions import PlannerIncompleteError
from waypointnav.modules.metrics.motion import MotionModel, rotate_time
from waypointnav.modules.world.grid import OccupancyGrid, Point, Pose, distance_field, line_of_sight, visible_from

CONNECT_RADIUS = 4.0
N_HEADING_BINS = 12
# worst-case ratio of 8-connected path length to true free-space length
GEODESIC_OVERESTIMATE = 1.0824


@dataclass(frozen=True)
class OracleTime:
    """
    Attributes:
        T: Minimal execution time found, in seconds; `math.inf` when the goal is unreachable.
        planner: `lattice_dijkstra` or `rrt_star`.
        n_segments: Number of straight segments in the plan.
        waypoints: Positions of the plan from start to goal.
        history: Best goal cost after each planner iteration (RRT* only).
    """

    T: float
    planner: str
    n_segments: int = 0
    waypoints: tuple[Point, ...] = ()
    history: tuple[float, ...] = ()


@dataclass(frozen=True)
class RRTParams:
    """
    Attributes:
        iterations: Samples drawn.
        goal_bias: Probability of sampling the goal itself.
        geodesic_bias: Probability of drawing two free cells and keeping the one geodesically closer to the goal.
        radius: The longest straight edge.
        informed: Skip samples whose geodesic lower bound cannot beat the best plan.
    """

    iterations: int = 1500
    goal_bias: float = 0.1
    geodesic_bias: float = 0.2
    radius: float = CONNECT_RADIUS
    informed: bool = True


def _bearings(origin: Sequence[float], targets: np.ndarray) -> np.ndarray:
    return np.arctan2(targets[:, 1] - origin[1], targets[:, 0] - origin[0])


def _turns(headings: np.ndarray, bearings: np.ndarray) -> np.ndarray:
    """Turn magnitudes in degrees from each heading onto each bearing."""
    return np.degrees(np.abs((bearings - headings + np.pi) % (2 * np.pi) - np.pi))


def geodesic_distances(grid: OccupancyGrid, point: Point, positions: np.ndarray) -> np.ndarray:
    """Geodesic distance from `point` to the cell of each row of `positions`, `inf` where no free path exists."""
    field = distance_field(grid, point)
    cells = np.floor(np.asarray(positions, dtype=float)[:, ::-1] / grid.resolution).astype(int)
    return field[cells[:, 0], cells[:, 1]]


def geodesic_nearest(grid: OccupancyGrid, point: Point, positions: np.ndarray) -> int:
    """Index of the geodesically nearest of `positions` to `point`; ties go to the lowest index."""
    return int(np.argmin(geodesic_distances(grid, point, positions)))


def edge_cost(model: MotionModel, heading: float, a: Sequence[float], b: Sequence[float]) -> float:
    """Time to turn from `heading` towards `b` at `a` and drive there."""
    bearing = math.atan2(b[1] - a[1], b[0] - a[0])
    return float(model.rotate_times(_turns(np.array(heading), np.array(bearing)))) + float(
        model.translate_times(math.dist(a, b))
    )


def lattice_discretization_bound(model: MotionModel, n_segments: int) -> float:
    """
    The most the lattice's one-label-per-heading-bin pruning can cost a plan of `n_segments`: at each interior
    vertex the kept heading may differ from the best by up to one bin.
    """
    width = 360.0 / N_HEADING_BINS
    per_vertex = max(rotate_time(model, width), rotate_time(model, 180.0) - rotate_time(model, 180.0 - width))
    return max(0, n_segments - 1) * per_vertex


def _lattice_nodes(grid: OccupancyGrid, start: Pose, goal: Point) -> np.ndarray:
    centers = (grid.free_cells[:, ::-1] + 0.5) * grid.resolution
    return np.vstack([centers, start.position, goal])


def minimal_time_lattice(
    grid: OccupancyGrid, start: Pose, goal: Point, model: MotionModel, radius: float = CONNECT_RADIUS
) -> OracleTime:
    """
    Dijkstra over (node, heading bin) states. Nodes are the free cell centers plus the exact start and goal, moves
    go to nodes in line of sight within `radius`, and each state keeps the exact heading of its first settled
    label, so that every returned cost is the execution time of a real plan. The terminal heading is free.

    Args:
        grid: The world.
        start: The starting pose.
        goal: The goal position.
        model: The motion model the moves are timed with.
        radius: The longest single move.

    Returns:
        The oracle time, `math.inf` if the goal is unreachable and 0 if start and goal share a cell.

    Raises:
        InvalidPoseError: If the start or goal is not in free space.
    """
    grid.check_free(start.position, "start")
    grid.check_free(goal, "goal")
    if grid.cell_of(start.position) == grid.cell_of(goal):
        return OracleTime(0.0, "lattice_dijkstra", 0, (start.position, tuple(goal)))
    nodes = _lattice_nodes(grid, start, goal)
    source, target = len(nodes) - 2, len(nodes) - 1
    neighbours: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def moves(u: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if u not in neighbours:
            offsets = np.hypot(*(nodes - nodes[u]).T)
            candidates = np.flatnonzero((offsets <= radius) & (offsets > 0))
            candidates = candidates[candidates != source]
            candidates = candidates[visible_from(grid, nodes[u], nodes[candidates])]
            bearings = _bearings(nodes[u], nodes[candidates])
            neighbours[u] = (candidates, bearings, model.translate_times(offsets[candidates]))
        return neighbours[u]

    def bin_of(heading: np.ndarray) -> np.ndarray:
        return np.round(np.asarray(heading) / (2 * np.pi / N_HEADING_BINS)).astype(int) % N_HEADING_BINS

    tentative = np.full((len(nodes), N_HEADING_BINS), np.inf)
    settled: dict[tuple[int, int], Optional[tuple[int, int]]] = {}
    counter = itertools.count()
    start_state = (source, int(bin_of(start.heading)))
    heap = [(0.0, next(counter), start_state, start.heading, None)]
    while heap:
        cost, _, state, heading, parent = heapq.heappop(heap)
        if state in settled:
            continue
        settled[state] = parent
        u = state[0]
        if u == target:
            path = [state]
            while settled[path[-1]] is not None:
                path.append(settled[path[-1]])
            waypoints = tuple(tuple(map(float, nodes[s[0]])) for s in reversed(path))
            return OracleTime(float(cost), "lattice_dijkstra", len(path) - 1, waypoints)
        candidates, bearings, translate = moves(u)
        costs = cost + model.rotate_times(_turns(np.array(heading), bearings)) + translate
        bins = bin_of(bearings)
        better = costs < tentative[candidates, bins]
        for v, b, c, h in zip(candidates[better], bins[better], costs[better], bearings[better]):
            if (int(v), int(b)) not in settled:
                tentative[v, b] = c
                heapq.heappush(heap, (float(c), next(counter), (int(v), int(b)), float(h), state))
    return OracleTime(math.inf, "lattice_dijkstra")


class _Tree:
    """An RRT* tree whose node costs depend on the heading each node is reached with."""

    def __init__(self, capacity: int) -> None:
        self.graph = nx.DiGraph()
        self.positions = np.zeros((capacity, 2))
        self.headings = np.zeros(capacity)
        self.costs = np.full(capacity, np.inf)
        self.size = 0

    def add(self, position: Sequence[float], heading: float, cost: float, parent: Optional[int]) -> int:
        node = self.size
        self.positions[node], self.headings[node], self.costs[node] = position, heading, cost
        self.graph.add_node(node)
        if parent is not None:
            self.graph.add_edge(parent, node)
        self.size += 1
        return node

    def parent(self, node: int) -> Optional[int]:
        return next(iter(self.graph.predecessors(node)), None)

    def path(self, node: int) -> list[int]:
        nodes = [node]
        while (parent := self.parent(nodes[-1])) is not None:
            nodes.append(parent)
        return nodes[::-1]


def _rewire(tree: _Tree, model: MotionModel, new: int, candidates: np.ndarray, goal_node: Optional[int]) -> None:
    """
    Re-parent each candidate onto `new` when that lowers its cost. A node's new heading changes the turn cost of
    its children, so a rewire is only accepted if no descendant ends up more expensive.
    """
    origin = tree.positions[new]
    for q in candidates:
        q = int(q)
        bearing = math.atan2(tree.positions[q, 1] - origin[1], tree.positions[q, 0] - origin[0])
        cost = tree.costs[new] + edge_cost(model, tree.headings[new], origin, tree.positions[q])
        if not cost < tree.costs[q] - 1e-12:
            continue
        deltas = {}
        for child in tree.graph.successors(q):
            child_cost = cost + edge_cost(model, bearing, tree.positions[q], tree.positions[child])
            deltas[child] = child_cost - tree.costs[child]
        if any(d > 1e-12 for d in deltas.values()):
            continue
        tree.graph.remove_edge(tree.parent(q), q)
        tree.graph.add_edge(new, q)
        tree.costs[q], tree.headings[q] = cost, bearing
        for child, delta in deltas.items():
            tree.costs[child] += delta
            for descendant in nx.descendants(tree.graph, child):
                tree.costs[descendant] += delta
    if goal_node is not None:
        assert tree.costs[goal_node] < np.inf, "The goal node lost its connection during rewiring"


def minimal_time_rrt(
    grid: OccupancyGrid,
    start: Pose,
    goal: Point,
    model: MotionModel,
    seed: int = 0,
    params: Optional[RRTParams] = None,
) -> OracleTime:
    """
    RRT* over poses with motion-model edge costs. Samples are free cell centers (or the goal, with probability
    `goal_bias`), and with probability `geodesic_bias` the geodesically goal-nearer of two free cells. Nodes are
    ranked by geodesic distance to the sample; a sample whose geodesically nearest node is not in line of sight
    within `params.radius` is dropped, otherwise it is connected to the cheapest visible node in that radius and
    nearby nodes are rewired through it. Samples that cannot beat the best plan found, by a geodesic lower bound on
    the remaining driving time, are skipped. The start is first connected straight to the goal when possible.

    Args:
        grid: The world.
        start: The starting pose.
        goal: The goal position; the terminal heading is free.
        model: The motion model edges are timed with.
        seed: Seed of the sampling stream.
        params: Planner parameters, defaults to `RRTParams()`.

    Returns:
        The best goal-connected plan, with the best cost after every iteration in `history`.

    Raises:
        InvalidPoseError: If the start or goal is not in free space.
        PlannerIncompleteError: If the goal was never connected, carrying the best cost-to-come plus lower bound.
    """
    params = params or RRTParams()
    grid.check_free(start.position, "start")
    grid.check_free(goal, "goal")
    goal = (float(goal[0]), float(goal[1]))
    if grid.cell_of(start.position) == grid.cell_of(goal):
        return OracleTime(0.0, "rrt_star", 0, (start.position, goal))
    rng = numpy_rng(seed)
    goal_field = distance_field(grid, goal)
    start_cell, goal_cell = grid.cell_of(start.position), grid.cell_of(goal)
    tree = _Tree(params.iterations + 2)
    tree.add(start.position, start.heading, 0.0, None)
    present = {start_cell}
    goal_node = None
    if math.dist(start.position, goal) <= params.radius and line_of_sight(grid, start.position, goal):
        goal_node = tree.add(goal, 0.0, edge_cost(model, start.heading, start.position, goal), 0)
        present.add(goal_cell)

    slack = grid.resolution * math.sqrt(0.5)

    def remaining(point: Sequence[float]) -> float:
        return max(0.0, goal_field[grid.cell_of(point)] / GEODESIC_OVERESTIMATE - slack)

    def lower_bound(point: Sequence[float]) -> float:
        return model.b1 * (math.dist(start.position, point) + remaining(point)) + model.b0

    free = grid.free_cells
    history = []
    for _ in range(params.iterations):
        best = tree.costs[goal_node] if goal_node is not None else math.inf
        draw = rng.random()
        if draw < params.goal_bias:
            cell = goal_cell
        elif draw < params.goal_bias + params.geodesic_bias:
            pair = free[rng.integers(len(free), size=2)]
            cell = tuple(int(c) for c in min(pair, key=lambda c: goal_field[c[0], c[1]]))
        else:
            cell = tuple(int(c) for c in free[rng.integers(len(free))])
        if cell in present:
            history.append(best)
            continue
        point = goal if cell == goal_cell else grid.cell_center(cell)
        if params.informed and lower_bound(point) >= best:
            history.append(best)
            continue
        expandable = np.arange(tree.size) if goal_node is None else np.delete(np.arange(tree.size), goal_node)
        geodesic = geodesic_distances(grid, point, tree.positions[expandable])
        order = np.argsort(geodesic, kind="stable")
        expandable, geodesic = expandable[order], geodesic[order]
        within = np.flatnonzero(np.hypot(*(tree.positions[expandable] - point).T) <= params.radius)
        if len(within):
            within = within[visible_from(grid, point, tree.positions[expandable[within]])]
        near = expandable[within]
        # the geodesically nearest node must be connectable, as in a plain RRT extension
        if not len(near) or geodesic[within[0]] > geodesic[0]:
            history.append(best)
            continue
        bearings = np.arctan2(point[1] - tree.positions[near, 1], point[0] - tree.positions[near, 0])
        costs = (
            tree.costs[near]
            + model.rotate_times(_turns(tree.headings[near], bearings))
            + model.translate_times(np.hypot(*(tree.positions[near] - point).T))
        )
        choice = int(np.argmin(costs))
        parent = int(near[choice])
        node = tree.add(point, float(bearings[choice]), float(costs[choice]), parent)
        present.add(cell)
        if cell == goal_cell:
            goal_node = node
        else:
            _rewire(tree, model, node, near[near != parent], goal_node)
            if goal_node is not None and math.dist(point, goal) <= params.radius and line_of_sight(grid, point, goal):
                _rewire(tree, model, node, np.array([goal_node]), goal_node)
        history.append(tree.costs[goal_node] if goal_node is not None else math.inf)
    if goal_node is None:
        partial = min(tree.costs[n] + model.b1 * remaining(tree.positions[n]) for n in range(tree.size))
        raise PlannerIncompleteError(f"RRT* did not reach the goal in {params.iterations} iterations", float(partial))
    nodes = tree.path(goal_node)
    waypoints = tuple(tuple(map(float, tree.positions[n])) for n in nodes)
    return OracleTime(float(tree.costs[goal_node]), "rrt_star", len(nodes) - 1, waypoints, tuple(map(float, history)))
