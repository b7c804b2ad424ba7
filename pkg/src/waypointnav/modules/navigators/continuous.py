import math

from waypointnav.modules.navigators.commands import NULL_EPSILON, NavigationOutcome, Rotate, Translate, apply_command
from waypointnav.modules.world.grid import OccupancyGrid, Pose, raycast, wrap_signed

# distance kept from an obstacle face when a translation is cut short
CONTACT_MARGIN = 1e-6


def waypoint_target(pose: Pose, waypoint: tuple[float, float]) -> tuple[float, float]:
    """The world position of the relative polar waypoint (r, θ) seen from `pose`."""
    r, theta = waypoint
    return (pose.x + r * math.cos(pose.heading + theta), pose.y + r * math.sin(pose.heading + theta))


def truncated_translation(grid: OccupancyGrid, pose: Pose, distance: float) -> tuple[float, bool]:
    """
    How far a translation of `distance` along the heading gets before touching an obstacle.

    Returns:
        The executed distance and whether the move was cut short.
    """
    if distance <= 0:
        return 0.0, False
    contact = raycast(grid, pose.position, pose.heading, distance + grid.resolution)
    if contact > distance:
        return distance, False
    return max(0.0, contact - CONTACT_MARGIN), True


def continuous_navigate(grid: OccupancyGrid, pose: Pose, waypoint: tuple[float, float]) -> NavigationOutcome:
    """
    Turn in place towards the waypoint, then drive straight for its distance, stopping at the first obstacle
    contact. Actuation is otherwise perfect.

    Args:
        grid: The world.
        pose: The starting pose, which must lie in free space.
        waypoint: The relative polar waypoint (r, θ).

    Returns:
        The outcome, with at most one rotation and one translation.

    Raises:
        InvalidPoseError: If `pose` is not in free space.
    """
    grid.check_free(pose.position, "pose")
    r, theta = waypoint
    if r < 0:
        raise ValueError(f"Waypoint distance must be nonnegative, got {r}")
    target = waypoint_target(pose, waypoint)
    commands = []
    angle = wrap_signed(theta)
    if abs(angle) >= NULL_EPSILON:
        commands.append(Rotate(angle))
        pose = apply_command(pose, commands[-1])
    start = pose.position
    executed, collided = truncated_translation(grid, pose, r)
    commands.append(Translate(executed))
    final = apply_command(pose, commands[-1])
    return NavigationOutcome(
        final_pose=final,
        commands=tuple(commands),
        path=(start, final.position),
        collided=collided,
        residual=math.dist(final.position, target),
    )
