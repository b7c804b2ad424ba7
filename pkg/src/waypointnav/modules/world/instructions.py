"""Templated route instructions over a small fixed vocabulary."""

import math
from dataclasses import dataclass
from typing import Final, Sequence

from waypointnav.modules.world.grid import wrap_signed


@dataclass(frozen=True)
class Vocabulary:
    """An ordered set of template words; token ids are their dense positions."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("Vocabulary tokens must be unique")
        if not 0 < len(self.tokens) <= 64:
            raise ValueError(f"Vocabulary size must be in [1, 64], got {len(self.tokens)}")

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, words: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.tokens.index(w) for w in words)

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.tokens[i] for i in ids]


VOCABULARY: Final = Vocabulary(("go", "forward", "turn", "left", "right", "slight", "around", "then", "stop"))

# thresholds on the absolute heading change at a path vertex, in degrees
STRAIGHT_BELOW: Final = 20.0
SLIGHT_BELOW: Final = 60.0
TURN_BELOW: Final = 150.0


def classify_turn(delta: float) -> list[str]:
    """
    Words for a heading change of `delta` radians (counter-clockwise positive); empty when the path carries straight on.

    Examples:
        >>> classify_turn(math.radians(90))
        ['turn', 'left']
        >>> classify_turn(math.radians(-30))
        ['slight', 'right']
    """
    degrees = math.degrees(abs(wrap_signed(delta)))
    side = "left" if delta > 0 else "right"
    if degrees < STRAIGHT_BELOW:
        return []
    if degrees < SLIGHT_BELOW:
        return ["slight", side]
    if degrees < TURN_BELOW:
        return ["turn", side]
    return ["turn", "around"]


def path_bearings(path: Sequence[Sequence[float]]) -> list[float]:
    return [math.atan2(q[1] - p[1], q[0] - p[0]) for p, q in zip(path[:-1], path[1:]) if math.dist(p, q) > 0]


def instruction_words(path: Sequence[Sequence[float]], start_heading: float) -> list[str]:
    """
    Template an instruction from a polyline's turn sequence: "go forward", then "then <turn> then go forward"
    for every classified turn, and a final "then stop".
    """
    words = []
    heading = start_heading
    for bearing in path_bearings(path):
        turn = classify_turn(wrap_signed(bearing - heading))
        if turn:
            words += (["then"] if words else []) + turn
        if not words or turn:
            words += (["then"] if words else []) + ["go", "forward"]
        heading = bearing
    return words + (["then"] if words else []) + ["stop"]


def instruction_tokens(
    path: Sequence[Sequence[float]], start_heading: float, vocabulary: Vocabulary = VOCABULARY
) -> tuple[int, ...]:
    return vocabulary.encode(instruction_words(path, start_heading))
