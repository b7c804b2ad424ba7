"""Low-level motion commands, their replay in free space and the `R/T/S` command log."""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from waypointnav.common.exceptions import ParseError
from waypointnav.modules.world.grid import Pose, wrap_signed

NULL_EPSILON = 1e-6


@dataclass(frozen=True)
class Rotate:
    """An in-place turn by `angle` radians, counter-clockwise positive, within (−π, π]."""

    angle: float

    def __post_init__(self) -> None:
        if not -math.pi < self.angle <= math.pi:
            raise ValueError(f"Rotate angle must lie in (−π, π], got {self.angle}")


@dataclass(frozen=True)
class Translate:
    """A straight move of `distance` meters along the current heading."""

    distance: float

    def __post_init__(self) -> None:
        if not self.distance >= 0:
            raise ValueError(f"Translate distance must be nonnegative, got {self.distance}")


@dataclass(frozen=True)
class Stop:
    pass


Command = Union[Rotate, Translate, Stop]


def apply_command(pose: Pose, command: Command) -> Pose:
    if isinstance(command, Rotate):
        return Pose(pose.x, pose.y, pose.heading + command.angle)
    if isinstance(command, Translate):
        return Pose(
            pose.x + command.distance * math.cos(pose.heading),
            pose.y + command.distance * math.sin(pose.heading),
            pose.heading,
        )
    return pose


def replay_commands(pose: Pose, commands: Iterable[Command]) -> Pose:
    """The pose reached by executing `commands` from `pose` in free space."""
    for command in commands:
        pose = apply_command(pose, command)
    return pose


def collapse_commands(commands: Sequence[Command], epsilon: float = NULL_EPSILON) -> list[Command]:
    """
    Merge runs of adjacent rotations into one (angle sum wrapped onto (−π, π]) and drop commands whose magnitude
    is below `epsilon`. Translations are never merged.

    Examples:
        >>> collapse_commands([Rotate(0.1), Rotate(-0.1)])
        []
        >>> collapse_commands([Translate(0.25), Translate(0.25)])
        [Translate(distance=0.25), Translate(distance=0.25)]
    """
    collapsed: list[Command] = []
    pending = None
    for command in commands:
        if isinstance(command, Rotate):
            pending = command.angle if pending is None else wrap_signed(pending + command.angle)
            continue
        if pending is not None and abs(pending) >= epsilon:
            collapsed.append(Rotate(pending))
        pending = None
        if not (isinstance(command, Translate) and command.distance < epsilon):
            collapsed.append(command)
    if pending is not None and abs(pending) >= epsilon:
        collapsed.append(Rotate(pending))
    return collapsed


def format_command(command: Command) -> str:
    if isinstance(command, Rotate):
        return f"R {math.degrees(command.angle)!r}"
    if isinstance(command, Translate):
        return f"T {command.distance!r}"
    return "S"


def parse_command(text: str, line: int = 1) -> Command:
    """
    Parse one log line: `R <degrees>`, `T <meters>` or `S`.

    Raises:
        ParseError: If the line is not a well-formed command.
    """
    parts = text.split()
    try:
        if parts == ["S"]:
            return Stop()
        if len(parts) == 2 and parts[0] == "R":
            return Rotate(wrap_signed(math.radians(float(parts[1]))))
        if len(parts) == 2 and parts[0] == "T":
            return Translate(float(parts[1]))
    except ValueError as e:
        raise ParseError(f"malformed command '{text}' ({e})", line) from e
    raise ParseError(f"unknown command '{text}'", line)


def write_command_log(commands: Iterable[Command], path: Path) -> None:
    with open(path, "w") as f:
        f.writelines(format_command(c) + "\n" for c in commands)


def read_command_log(path: Path) -> list[Command]:
    with open(path) as f:
        return [parse_command(text, n) for n, text in enumerate(f.read().splitlines(), start=1) if text.strip()]


@dataclass(frozen=True)
class NavigationOutcome:
    """
    The result of executing one waypoint.

    Attributes:
        final_pose: The pose actually reached in the world.
        commands: The issued commands, translations carrying the distance actually executed.
        path: The positions visited, starting with the initial position and adding one point per translation.
        collided: Whether any translation was cut short by an obstacle.
        residual: Distance from the final position to the target waypoint.
        complete: False when a step cap stopped the navigator before it converged.
    """

    final_pose: Pose
    commands: tuple[Command, ...]
    path: tuple[tuple[float, float], ...]
    collided: bool
    residual: float
    complete: bool = True
