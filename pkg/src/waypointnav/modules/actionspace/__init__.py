from waypointnav.modules.actionspace.distributions import TruncatedGaussian
from waypointnav.modules.actionspace.heads import (
    ActionBatch,
    ExpressivityConfig,
    HeadOutputs,
    WaypointAction,
    WaypointDistribution,
    compose_waypoint,
)
