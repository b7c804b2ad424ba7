import math

import pytest

from waypointnav.modules.world.instructions import (
    VOCABULARY,
    Vocabulary,
    classify_turn,
    instruction_tokens,
    instruction_words,
)


@pytest.mark.parametrize(
    "degrees, words",
    [
        (0, []),
        (10, []),
        (-19, []),
        (30, ["slight", "left"]),
        (-45, ["slight", "right"]),
        (90, ["turn", "left"]),
        (-120, ["turn", "right"]),
        (170, ["turn", "around"]),
        (-179, ["turn", "around"]),
    ],
)
def test_classify_turn(degrees, words) -> None:
    assert classify_turn(math.radians(degrees)) == words


def test_vocabulary_is_dense() -> None:
    assert VOCABULARY.encode(VOCABULARY.tokens) == tuple(range(len(VOCABULARY)))
    assert VOCABULARY.decode([0, 1]) == ["go", "forward"]


def test_vocabulary_validation() -> None:
    with pytest.raises(ValueError, match="unique"):
        Vocabulary(("go", "go"))
    with pytest.raises(ValueError, match=r"size must be in \[1, 64\]"):
        Vocabulary(tuple(f"w{i}" for i in range(65)))


def test_instruction_for_zigzag() -> None:
    path = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 0.5)]
    words = instruction_words(path, 0.0)
    assert words[:2] == ["go", "forward"]
    assert words[-1] == "stop"
    assert words.count("left") == 1
    assert words.count("right") == 1


def test_instruction_turning_at_start() -> None:
    words = instruction_words([(0.0, 0.0), (0.0, 1.0)], 0.0)
    assert words == ["turn", "left", "then", "go", "forward", "then", "stop"]


def test_instruction_tokens_end_with_stop() -> None:
    tokens = instruction_tokens([(0.0, 0.0), (2.0, 0.0)], 0.0)
    assert tokens[-1] == VOCABULARY.tokens.index("stop")
