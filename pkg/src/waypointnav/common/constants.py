"""Define all of the common constants used throughout the project."""

import math
from time import strftime
from typing import Final

TIME: Final = strftime("%Y_%m_%d___%H_%M_%S")

OUTPUT_ROOT_ENV: Final = "WAYPOINTNAV_OUT"
DEFAULT_OUTPUT_ROOT: Final = "experiments"

N_SECTORS: Final = 12
SECTOR_WIDTH: Final = 2 * math.pi / N_SECTORS
STOP: Final = N_SECTORS

OFFSET_BOUND: Final = math.radians(15.0)
DISTANCE_BOUNDS: Final = (0.25, 4.0)
DISCRETE_OFFSETS: Final = tuple(math.radians(d) for d in (-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0))
DISCRETE_DISTANCES: Final = (0.25, 0.75, 1.25, 1.75, 2.25, 2.75)
FIXED_OFFSET: Final = 0.0
FIXED_DISTANCE: Final = 0.25
SIGMA_FLOOR: Final = 1e-3

DN_TURN: Final = math.radians(15.0)
DN_STEP: Final = 0.25

# (distance_mode, offset_mode) for each of the named expressivity presets
EXPRESSIVITY_PRESETS: Final = {
    "cc": ("continuous", "continuous"),
    "dc": ("discrete", "continuous"),
    "dd": ("discrete", "discrete"),
    "dfixed": ("discrete", "fixed"),
    "fixedc": ("fixed", "continuous"),
    "fixedfixed": ("fixed", "fixed"),
}

# Published MoveBase point-turn fits; the other profiles must be supplied explicitly
MOTION_PROFILES: Final = {
    "movebase": {"a2": 0.000358, "a1": 0.108, "a0": 2.23, "b1": 4.2, "b0": 0.362},
    "ilqr": None,
    "proportional": None,
}

REPORT_COLUMNS: Final = ["TL", "NE", "OS", "SR", "SPL", "EET", "SCT", "n_commands", "speed"]

CHECKPOINT_MAGIC: Final = b"WPNCKPT\x00"
CHECKPOINT_VERSION: Final = 1
WORLD_FORMAT_VERSION: Final = 1
