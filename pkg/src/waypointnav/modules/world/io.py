"""The line-oriented world file: a versioned header, run-length encoded rows and one JSON episode per line."""

import argparse
import itertools
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

import waypointnav.common.io as io
from waypointnav.common.common import get_version
from waypointnav.common.constants import WORLD_FORMAT_VERSION
from waypointnav.common.exceptions import ParseError
from waypointnav.modules.world.generation import Episode
from waypointnav.modules.world.grid import OccupancyGrid, Pose

MAGIC = "waypointnav-world"
_RUN = re.compile(r"(\d+)([#.])")
_EPISODE_KEYS = {"id", "start", "goal", "path", "tokens", "success_distance", "geodesic_length"}


@dataclass(frozen=True)
class WorldRecord:
    """A generated world together with the episodes sampled in it and the provenance of both."""

    seed: int
    grid: OccupancyGrid
    episodes: tuple[Episode, ...]
    digest: str
    version: str = ""

    def __post_init__(self) -> None:
        if not self.version:
            object.__setattr__(self, "version", get_version())


def world_filename(seed: int) -> str:
    return f"world_{seed}.txt"


def encode_row(row: np.ndarray) -> str:
    """
    Examples:
        >>> encode_row(np.array([True, False, False, True]))
        '1#2.1#'
    """
    return "".join(f"{len(list(run))}{'#' if blocked else '.'}" for blocked, run in itertools.groupby(row.tolist()))


def decode_row(text: str, width: int, line: int) -> list[bool]:
    if _RUN.sub("", text):
        raise ParseError(f"unexpected characters in row '{text}'", line)
    row = [char == "#" for count, char in _RUN.findall(text) for _ in range(int(count))]
    if len(row) != width:
        raise ParseError(f"row decodes to {len(row)} cells, expected {width}", line)
    return row


def episode_to_json(episode: Episode) -> str:
    return json.dumps(
        {
            "id": episode.id,
            "start": [episode.start.x, episode.start.y, episode.start.heading],
            "goal": list(episode.goal),
            "path": [list(p) for p in episode.shortest_path],
            "tokens": list(episode.instruction),
            "success_distance": episode.success_distance,
            "geodesic_length": episode.geodesic_length,
        }
    )


def episode_from_json(text: str, line: int) -> Episode:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid episode record ({e.msg})", line) from e
    if not isinstance(record, dict) or set(record) != _EPISODE_KEYS:
        raise ParseError(f"episode records need exactly the keys {sorted(_EPISODE_KEYS)}", line)
    try:
        return Episode(
            id=str(record["id"]),
            start=Pose(*map(float, record["start"])),
            goal=tuple(map(float, record["goal"])),
            shortest_path=tuple(tuple(map(float, p)) for p in record["path"]),
            geodesic_length=float(record["geodesic_length"]),
            instruction=tuple(int(t) for t in record["tokens"]),
            success_distance=float(record["success_distance"]),
        )
    except (TypeError, ValueError) as e:
        raise ParseError(f"malformed episode field ({e})", line) from e


def format_world(record: WorldRecord) -> str:
    grid = record.grid
    lines = [
        f"{MAGIC} {WORLD_FORMAT_VERSION}",
        f"version {record.version}",
        f"digest {record.digest}",
        f"seed {record.seed}",
        f"resolution {grid.resolution!r}",
        f"dimensions {grid.width_cells} {grid.height_cells}",
        *(encode_row(row) for row in grid.blocked),
        f"episodes {len(record.episodes)}",
        *(episode_to_json(e) for e in record.episodes),
    ]
    return "\n".join(lines) + "\n"


def _header(lines: list[str], line: int, key: str) -> str:
    if line > len(lines):
        raise ParseError(f"file ends before the '{key}' entry", line)
    text = lines[line - 1]
    name, _, value = text.partition(" ")
    if name != key or not value:
        raise ParseError(f"expected '{key} <value>', got '{text}'", line)
    return value


def parse_world(text: str) -> WorldRecord:
    """
    Parse the contents of a world file.

    Raises:
        ParseError: On any malformed or truncated content, naming the offending line.
    """
    lines = text.splitlines()
    if _header(lines, 1, MAGIC) != str(WORLD_FORMAT_VERSION):
        raise ParseError(f"unsupported world format version {lines[0].partition(' ')[2]}", 1)
    version = _header(lines, 2, "version")
    digest = _header(lines, 3, "digest")
    try:
        line = 4
        seed = int(_header(lines, line, "seed"))
        line = 5
        resolution = float(_header(lines, line, "resolution"))
        line = 6
        width, height = (int(v) for v in _header(lines, line, "dimensions").split())
    except ValueError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), line) from e
    rows = []
    for line in range(7, 7 + height):
        if line > len(lines):
            raise ParseError(f"file ends after {len(rows)} of {height} rows", line)
        rows.append(decode_row(lines[line - 1], width, line))
    line = 7 + height
    try:
        n_episodes = int(_header(lines, line, "episodes"))
        grid = OccupancyGrid(np.array(rows, dtype=bool), resolution)
    except ValueError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), line) from e
    episodes = tuple(episode_from_json(entry, n) for n, entry in enumerate(lines[line:], start=line + 1))
    if len(episodes) != n_episodes:
        raise ParseError(f"expected {n_episodes} episodes, found {len(episodes)}", line)
    return WorldRecord(seed, grid, episodes, digest, version)


def write_world(record: WorldRecord, path: Path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(format_world(record))


def read_world(path: Path) -> WorldRecord:
    with open(path) as f:
        return parse_world(f.read())


def check_output_paths(args: argparse.Namespace, dir_experiment: Path) -> list[Path]:
    """
    The world files a generation run will write, refusing to clobber existing ones without `--force`.

    Raises:
        FileExistsError: If any target exists and `args.force` is not set.
    """
    dir_worlds = dir_experiment / args.worlds_dir
    io.warn_if_path_supplied([args.worlds_dir], dir_experiment)
    paths = [dir_worlds / world_filename(args.seed + k) for k in range(args.n_worlds)]
    io.guard_overwrite(paths, args.force)
    dir_worlds.mkdir(parents=True, exist_ok=True)
    return paths


def load_worlds(dir_worlds: Path) -> list[WorldRecord]:
    """
    Read every world file in `dir_worlds`, ordered by seed.

    Raises:
        FileNotFoundError: If the directory holds no world files.
    """
    paths = sorted(Path(dir_worlds).glob("world_*.txt"))
    if not paths:
        raise FileNotFoundError(f"No world files found in {dir_worlds}, run `waypointnav generate` first")
    return sorted((read_world(p) for p in paths), key=lambda r: r.seed)


def load_required_data(args: argparse.Namespace, dir_experiment: Path) -> list[WorldRecord]:
    """
    The worlds generated earlier in the same pipeline when they were handed over, else those on disk.

    Args:
        args: The arguments passed to the module, potentially carrying the outputs of the generate module.
        dir_experiment: The path to the experiment directory.

    Returns:
        The world records ordered by seed.
    """
    if "worlds" in args.module_handover:
        return args.module_handover["worlds"]
    io.warn_if_path_supplied([args.worlds_dir], dir_experiment)
    return load_worlds(dir_experiment / args.worlds_dir)


def episode_triples(records: list[WorldRecord]) -> list[tuple[int, OccupancyGrid, Episode]]:
    """Every episode of `records` with its world's seed and grid, in file order."""
    return [(r.seed, r.grid, e) for r in records for e in r.episodes]
