import waypointnav.modules.actionspace as actionspace  # noqa: F401
import waypointnav.modules.evaluation as evaluation  # noqa: F401
import waypointnav.modules.metrics as metrics  # noqa: F401
import waypointnav.modules.navigators as navigators  # noqa: F401
import waypointnav.modules.plotting as plotting  # noqa: F401
import waypointnav.modules.policy as policy  # noqa: F401
import waypointnav.modules.trainer as trainer  # noqa: F401
import waypointnav.modules.world as world  # noqa: F401
