import pytest

from waypointnav.common.strings import expressivity_label, format_timedelta, preset_name


@pytest.mark.parametrize(
    "seconds, expected",
    [(5.0, "5s"), (65.0, "1m 5s"), (3723.0, "1h 2m 3s"), (90061.0, "1d 1h 1m 1s")],
)
def test_format_timedelta(seconds, expected) -> None:
    assert format_timedelta(0.0, seconds) == expected


@pytest.mark.parametrize(
    "distance, offset, label, name",
    [
        ("continuous", "continuous", "C/C", "cc"),
        ("discrete", "continuous", "D/C", "dc"),
        ("discrete", "discrete", "D/D", "dd"),
        ("discrete", "fixed", "D/fixed", "dfixed"),
        ("fixed", "continuous", "fixed/C", "fixedc"),
        ("fixed", "fixed", "fixed/fixed", "fixedfixed"),
    ],
)
def test_expressivity_names(distance, offset, label, name) -> None:
    assert expressivity_label(distance, offset) == label
    assert preset_name(distance, offset) == name


def test_preset_name_unknown() -> None:
    with pytest.raises(ValueError, match="No preset for distance mode 'continuous' and offset mode 'fixed'"):
        preset_name("continuous", "fixed")
