from typing import Callable, Final

from waypointnav.modules.navigators.commands import (
    Command,
    NavigationOutcome,
    Rotate,
    Stop,
    Translate,
    collapse_commands,
    replay_commands,
)
from waypointnav.modules.navigators.continuous import continuous_navigate
from waypointnav.modules.navigators.discrete import discrete_navigate

NAVIGATORS: Final[dict[str, Callable[..., NavigationOutcome]]] = {
    "cn": continuous_navigate,
    "dn": discrete_navigate,
}
