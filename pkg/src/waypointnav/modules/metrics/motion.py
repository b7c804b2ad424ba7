"""Point-turn robot timing: rotate and translate time fits, and the estimated execution time of command streams."""

import argparse
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np

from waypointnav.common.constants import MOTION_PROFILES
from waypointnav.modules.navigators.commands import NULL_EPSILON, Command, Rotate, Translate

COEFFICIENTS = ("a2", "a1", "a0", "b1", "b0")


@dataclass(frozen=True)
class MotionModel:
    """
    Execution time of single commands: a quadratic in the turn angle (degrees) and a linear function of the
    translation distance (meters). Commands with a magnitude below `null_epsilon` are not issued and take no time.
    """

    a2: float = MOTION_PROFILES["movebase"]["a2"]
    a1: float = MOTION_PROFILES["movebase"]["a1"]
    a0: float = MOTION_PROFILES["movebase"]["a0"]
    b1: float = MOTION_PROFILES["movebase"]["b1"]
    b0: float = MOTION_PROFILES["movebase"]["b0"]
    null_epsilon: float = NULL_EPSILON

    def __post_init__(self) -> None:
        for angle in (0.0, 180.0):
            if self.a2 * angle**2 + self.a1 * angle + self.a0 < 0 or 2 * self.a2 * angle + self.a1 < 0:
                raise ValueError(f"Rotate time must be nonnegative and nondecreasing on [0°, 180°], got {self}")
        if self.b1 < 0 or self.b0 < 0:
            raise ValueError(f"Translate time must be nonnegative and nondecreasing, got b1={self.b1}, b0={self.b0}")

    @classmethod
    def from_profile(cls, profile: str = "movebase", **coefficients: Optional[float]) -> "MotionModel":
        """
        A motion model from a named profile, with any non-`None` `coefficients` overriding it.

        Raises:
            ValueError: If the profile is unknown, or ships without fits and not every coefficient is given.
        """
        if profile not in MOTION_PROFILES:
            raise ValueError(f"Unknown motion profile '{profile}', choose from {list(MOTION_PROFILES)}")
        given = {k: v for k, v in coefficients.items() if v is not None}
        defaults = MOTION_PROFILES[profile] or {}
        missing = [k for k in COEFFICIENTS if k not in given and k not in defaults]
        if missing:
            raise ValueError(f"The '{profile}' profile has no published fit, supply {missing} explicitly")
        return cls(**{**defaults, **given})

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "MotionModel":
        return cls.from_profile(
            args.motion_profile,
            a2=args.rotate_a2,
            a1=args.rotate_a1,
            a0=args.rotate_a0,
            b1=args.translate_b1,
            b0=args.translate_b0,
        )

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    def rotate_times(self, degrees: np.ndarray) -> np.ndarray:
        """Vectorised `rotate_time` over magnitudes in degrees."""
        degrees = np.abs(np.asarray(degrees, dtype=float))
        times = self.a2 * degrees**2 + self.a1 * degrees + self.a0
        return np.where(degrees < math.degrees(self.null_epsilon), 0.0, times)

    def translate_times(self, meters: np.ndarray) -> np.ndarray:
        meters = np.asarray(meters, dtype=float)
        return np.where(meters < self.null_epsilon, 0.0, self.b1 * meters + self.b0)


def rotate_time(model: MotionModel, angle: float) -> float:
    """
    Seconds to turn in place by `angle` degrees.

    Raises:
        ValueError: If `angle` is negative or exceeds 180°.

    Examples:
        >>> round(rotate_time(MotionModel(), 90.0), 4)
        14.8498
    """
    if angle < 0:
        raise ValueError(f"Rotation magnitudes are nonnegative, got {angle}")
    if angle > 180.0 + 1e-9:
        raise ValueError(f"Rotation magnitudes are at most 180°, got {angle}")
    return float(model.rotate_times(angle))


def translate_time(model: MotionModel, dist: float) -> float:
    """
    Seconds to drive `dist` meters in a straight line.

    Raises:
        ValueError: If `dist` is negative.

    Examples:
        >>> round(translate_time(MotionModel(), 1.0), 4)
        4.562
    """
    if dist < 0:
        raise ValueError(f"Translation distances are nonnegative, got {dist}")
    return float(model.translate_times(dist))


def command_time(command: Command, model: MotionModel) -> float:
    if isinstance(command, Rotate):
        return rotate_time(model, math.degrees(abs(command.angle)))
    if isinstance(command, Translate):
        return translate_time(model, command.distance)
    return 0.0


def eet(commands: Iterable[Command], model: MotionModel) -> float:
    """Estimated execution time: the sum of the per-command times, with STOP free."""
    return float(sum(command_time(c, model) for c in commands))


def issued_commands(commands: Iterable[Command], epsilon: float = NULL_EPSILON) -> int:
    """The number of motion commands large enough to be issued."""
    return sum(
        1
        for c in commands
        if (isinstance(c, Rotate) and abs(c.angle) >= epsilon) or (isinstance(c, Translate) and c.distance >= epsilon)
    )
