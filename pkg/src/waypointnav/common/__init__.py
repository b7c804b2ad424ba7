from waypointnav.common.common import set_seed as set_seed
from waypointnav.common.io import experiment_io as experiment_io
