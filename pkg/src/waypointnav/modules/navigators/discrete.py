import math

from waypointnav.common.constants import DN_STEP, DN_TURN
from waypointnav.modules.navigators.commands import NavigationOutcome, Rotate, Translate, apply_command
from waypointnav.modules.navigators.continuous import truncated_translation, waypoint_target
from waypointnav.modules.world.grid import OccupancyGrid, Pose, wrap_signed

DEFAULT_STEP_CAP = 64
_TOL = 1e-9


def discrete_navigate(
    grid: OccupancyGrid, pose: Pose, waypoint: tuple[float, float], step_cap: int = DEFAULT_STEP_CAP
) -> NavigationOutcome:
    """
    Reach a waypoint with 15° turns and 0.25 m forward steps only, greedily. The navigator dead-reckons in its
    own frame and assumes free space:

    - once within half a step of the target it stops;
    - while the bearing error exceeds 7.5° it turns 15° towards the target (left on an exact 180° error);
    - otherwise it steps forward if that strictly reduces the dead-reckoned distance, and stops if not.

    In the world, forward steps are cut short at obstacles; this does not change the decisions.

    Args:
        grid: The world.
        pose: The starting pose, which must lie in free space.
        waypoint: The relative polar waypoint (r, θ).
        step_cap: The most commands issued before giving up; the outcome is then flagged incomplete.

    Returns:
        The outcome.

    Raises:
        InvalidPoseError: If `pose` is not in free space.
    """
    grid.check_free(pose.position, "pose")
    target = waypoint_target(pose, waypoint)
    belief, actual = pose, pose
    commands, path = [], [pose.position]
    collided, complete = False, True
    while True:
        distance = math.dist(belief.position, target)
        if distance <= DN_STEP / 2 + _TOL:
            break
        error = wrap_signed(math.atan2(target[1] - belief.y, target[0] - belief.x) - belief.heading)
        # rounding can put an exact half turn just inside −π; it still turns left
        if abs(error) >= math.pi - _TOL:
            error = math.pi
        if abs(error) > DN_TURN / 2 + _TOL:
            command = Rotate(DN_TURN if error > 0 else -DN_TURN)
        else:
            ahead = apply_command(belief, Translate(DN_STEP))
            if not math.dist(ahead.position, target) < distance:
                break
            command = Translate(DN_STEP)
        if len(commands) >= step_cap:
            complete = False
            break
        belief = apply_command(belief, command)
        if isinstance(command, Translate):
            executed, truncated = truncated_translation(grid, actual, DN_STEP)
            collided |= truncated
            command = Translate(executed)
        actual = apply_command(actual, command)
        commands.append(command)
        if isinstance(command, Translate):
            path.append(actual.position)
    return NavigationOutcome(
        final_pose=actual,
        commands=tuple(commands),
        path=tuple(path),
        collided=collided,
        residual=math.dist(actual.position, target),
        complete=complete,
    )
