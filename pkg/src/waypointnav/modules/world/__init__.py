from waypointnav.modules.world.generation import Episode, EpisodeParams, WorldParams, generate_episode, generate_world
from waypointnav.modules.world.grid import (
    OccupancyGrid,
    Pose,
    RangeScan,
    distance_field,
    geodesic_distance,
    panorama_scan,
    raycast,
)
from waypointnav.modules.world.instructions import VOCABULARY, Vocabulary
from .run import run as run
