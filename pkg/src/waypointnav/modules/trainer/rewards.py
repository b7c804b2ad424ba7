from waypointnav.common.constants import FIXED_DISTANCE
from waypointnav.modules.actionspace.heads import WaypointAction
from waypointnav.modules.trainer.config import PPOConfig


def step_reward(
    prev_geo: float, new_geo: float, action: WaypointAction, stopped: bool, at_goal: bool, cfg: PPOConfig
) -> float:
    """
    Shaped reward of one decision: the success bonus for stopping within the success distance, the reduction in
    geodesic distance to the goal, and a slack penalty proportional to the predicted waypoint distance (in units
    of the 0.25 m base step). STOP pays no slack.

    Examples:
        >>> round(step_reward(5.0, 4.2, WaypointAction(0, 0.0, 0.25), False, False, PPOConfig()), 10)
        0.75
    """
    reward = prev_geo - new_geo
    if stopped:
        return reward + (cfg.r_success if at_goal else 0.0)
    return reward + cfg.slack_scalar * action.distance / FIXED_DISTANCE
