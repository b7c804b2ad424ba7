from waypointnav.modules.policy.io import load_checkpoint, save_checkpoint
from waypointnav.modules.policy.layers import attention, gru_cell
from waypointnav.modules.policy.network import PolicyConfig, PolicyOutput, PolicyState, WaypointPolicy
from waypointnav.modules.policy.observations import Observation, ObservationBatch
