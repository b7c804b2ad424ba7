from waypointnav.modules.metrics.motion import MotionModel, eet, rotate_time, translate_time
from waypointnav.modules.metrics.planners import (
    OracleTime,
    RRTParams,
    lattice_discretization_bound,
    minimal_time_lattice,
    minimal_time_rrt,
)
from waypointnav.modules.metrics.vln import EpisodeResult, MetricsReport, episode_report, sct, vln_metrics
