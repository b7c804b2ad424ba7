"""String manipulation functions."""

import datetime

from waypointnav.common.constants import EXPRESSIVITY_PRESETS

_MODE_LETTERS = {"continuous": "C", "discrete": "D", "fixed": "fixed"}


def format_timedelta(start: float, finish: float) -> str:
    """
    Calculate and prettily format the difference between two calls to `time.time()`.

    Examples:
        >>> format_timedelta(0.0, 3723.0)
        '1h 2m 3s'
    """
    total = datetime.timedelta(seconds=finish - start)
    hours, remainder = divmod(total.seconds, 3600)
    minutes, seconds = divmod(remainder, 60)
    if total.days > 0:
        return f"{total.days}d {hours}h {minutes}m {seconds}s"
    if hours > 0:
        return f"{hours}h {minutes}m {seconds}s"
    if minutes > 0:
        return f"{minutes}m {seconds}s"
    return f"{seconds}s"


def expressivity_label(distance_mode: str, offset_mode: str) -> str:
    """
    Table label for an expressivity configuration, distance first.

    Examples:
        >>> expressivity_label("discrete", "fixed")
        'D/fixed'
    """
    return f"{_MODE_LETTERS[distance_mode]}/{_MODE_LETTERS[offset_mode]}"


def preset_name(distance_mode: str, offset_mode: str) -> str:
    """
    The CLI preset name (`--expressivity`) for a pair of modes.

    Examples:
        >>> preset_name("fixed", "continuous")
        'fixedc'
    """
    for name, modes in EXPRESSIVITY_PRESETS.items():
        if modes == (distance_mode, offset_mode):
            return name
    raise ValueError(f"No preset for distance mode '{distance_mode}' and offset mode '{offset_mode}'")
