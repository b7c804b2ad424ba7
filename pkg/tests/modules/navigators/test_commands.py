import math

import pytest

from waypointnav.common.exceptions import ParseError
from waypointnav.modules.navigators.commands import (
    Rotate,
    Stop,
    Translate,
    collapse_commands,
    format_command,
    parse_command,
    read_command_log,
    replay_commands,
    write_command_log,
)
from waypointnav.modules.world.grid import Pose

LEFT = Rotate(math.radians(15.0))


def test_command_invariants() -> None:
    Rotate(math.pi)
    with pytest.raises(ValueError, match="Rotate angle"):
        Rotate(-math.pi)
    with pytest.raises(ValueError, match="nonnegative"):
        Translate(-0.1)


def test_collapse_merges_adjacent_turns() -> None:
    collapsed = collapse_commands([LEFT, LEFT, Translate(0.25)])
    assert len(collapsed) == 2
    assert collapsed[0].angle == pytest.approx(math.radians(30.0))
    assert collapsed[1] == Translate(0.25)


def test_collapse_drops_cancelling_turns() -> None:
    assert collapse_commands([Rotate(math.radians(10.0)), Rotate(math.radians(-10.0))]) == []


def test_collapse_never_merges_translations() -> None:
    assert collapse_commands([Translate(0.25), Translate(0.25)]) == [Translate(0.25), Translate(0.25)]


def test_collapse_wraps_and_drops_null_moves() -> None:
    collapsed = collapse_commands([Rotate(math.radians(120.0))] * 2 + [Translate(0.0), Rotate(1e-9), Stop()])
    assert collapsed[0].angle == pytest.approx(math.radians(-120.0))
    assert collapsed[1:] == [Stop()]


def test_collapse_keeps_the_pose() -> None:
    commands = [LEFT, LEFT, Translate(0.25), Rotate(-0.3), Rotate(0.1), Translate(1.0), LEFT]
    start = Pose(1.0, 2.0, 0.5)
    expected, collapsed = replay_commands(start, commands), replay_commands(start, collapse_commands(commands))
    assert collapsed.position == pytest.approx(expected.position)
    assert math.cos(collapsed.heading - expected.heading) == pytest.approx(1.0)


def test_log_lines() -> None:
    assert format_command(Translate(0.25)) == "T 0.25"
    assert format_command(Stop()) == "S"
    assert parse_command("R 90") == Rotate(math.pi / 2)
    assert parse_command("  T 1.5 ") == Translate(1.5)
    assert parse_command("R 180") == Rotate(math.pi)


@pytest.mark.parametrize("text", ["X 1", "R", "T 1 2", "S S", ""])
def test_unknown_commands_are_rejected(text) -> None:
    with pytest.raises(ParseError, match="line 3: unknown command"):
        parse_command(text, line=3)


@pytest.mark.parametrize("text", ["R abc", "T -1"])
def test_malformed_commands_are_rejected(text) -> None:
    with pytest.raises(ParseError, match="malformed command"):
        parse_command(text)


def test_command_log_file(tmp_path) -> None:
    commands = [Rotate(math.radians(-37.5)), Translate(0.1 + 0.2), Stop()]
    write_command_log(commands, tmp_path / "commands.log")
    rotate, translate, stop = read_command_log(tmp_path / "commands.log")
    assert rotate.angle == pytest.approx(math.radians(-37.5), abs=1e-12)
    assert translate.distance == pytest.approx(0.3, abs=1e-12)
    assert stop == Stop()


def test_command_log_reports_the_offending_line(tmp_path) -> None:
    (tmp_path / "commands.log").write_text("T 0.25\n\nR 15\nQ\n")
    with pytest.raises(ParseError) as e:
        read_command_log(tmp_path / "commands.log")
    assert e.value.line == 4
