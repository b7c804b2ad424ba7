"""
Functions to define the CLI's "common" arguments, i.e. those that can be applied to either:
 - All module argument lists, e.g. --experiment-name, --seed, etc.
 - A subset of module(s) argument lists, e.g. the world parameters, the policy architecture, etc.

Options shared by several modules live here so that the `pipeline` and `config` parsers declare each once.
"""

import argparse
from typing import Callable, Final

from waypointnav.common.constants import EXPRESSIVITY_PRESETS, MOTION_PROFILES, TIME
from waypointnav.modules.policy.network import PolicyConfig
from waypointnav.modules.world.generation import WORLD_KINDS, EpisodeParams, WorldParams

NAVIGATOR_CHOICES: Final = ["cn", "dn"]


def get_core_parser(overrides: bool = False) -> argparse.ArgumentParser:
    """
    Create the core common parser group applied to all modules (and the `pipeline` and `config` options).
    Note that we leverage common titling of the argument group to ensure arguments appear together even if declared
    separately.

    Args:
        overrides: whether the arguments declared within are required or not.

    Returns:
        The parser with the group containing the core arguments attached.
    """
    core = argparse.ArgumentParser(add_help=False)
    core_grp = core.add_argument_group(title="options")
    core_grp.add_argument(
        "-e",
        "--experiment-name",
        type=str,
        default=TIME,
        help="name the experiment run, outputs go to `$WAYPOINTNAV_OUT/<EXPERIMENT_NAME>/`",
    )
    core_grp.add_argument(
        "-o",
        "--out",
        type=str,
        default=None,
        help="write outputs to this directory instead of the experiment directory",
    )
    core_grp.add_argument(
        "-f",
        "--force",
        action="store_true",
        help="overwrite existing outputs",
    )
    core_grp.add_argument(
        "--save-config",
        action="store_true",
        help="save the config provided via the cli, this is a recommended option for reproducibility",
    )
    return core


def get_seed_parser(overrides: bool = False) -> argparse.ArgumentParser:
    """
    Create the common parser group for the seed.
    NB This is separate to the rest of the core arguments as it does not apply to the compare module.
    """
    parser = argparse.ArgumentParser(add_help=False)
    parser_grp = parser.add_argument_group(title="options")
    parser_grp.add_argument(
        "-s",
        "--seed",
        type=int,
        help="specify a seed for reproducibility, this is a recommended option for reproducibility",
    )
    return parser


def get_worlds_parser(overrides: bool = False) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser_grp = parser.add_argument_group(title="world files")
    parser_grp.add_argument(
        "--worlds-dir",
        type=str,
        default="worlds",
        help="directory of the world files, relative to the experiment directory",
    )
    return parser


def get_world_parser(overrides: bool = False) -> argparse.ArgumentParser:
    """The world generator and episode sampler parameters, used to generate held-out and training worlds alike."""
    world, episode = WorldParams(), EpisodeParams()
    parser = argparse.ArgumentParser(add_help=False)
    parser_grp = parser.add_argument_group(title="world generation")
    parser_grp.add_argument(
        "--world-kind",
        type=str,
        default=world.kind,
        choices=WORLD_KINDS,
        help="`rooms` joins rectangular rooms with corridors, `open` is one room with optional pillars",
    )
    parser_grp.add_argument("--width-cells", type=int, default=world.width_cells, help="grid width in cells")
    parser_grp.add_argument("--height-cells", type=int, default=world.height_cells, help="grid height in cells")
    parser_grp.add_argument("--resolution", type=float, default=world.resolution, help="meters per cell")
    parser_grp.add_argument("--n-rooms", type=int, default=world.n_rooms, help="rooms per world")
    parser_grp.add_argument("--room-min", type=int, default=world.room_min, help="smallest room side in cells")
    parser_grp.add_argument("--room-max", type=int, default=world.room_max, help="largest room side in cells")
    parser_grp.add_argument("--corridor-width", type=int, default=world.corridor_width, help="corridor width in cells")
    parser_grp.add_argument("--n-pillars", type=int, default=world.n_pillars, help="pillars to scatter in open worlds")
    parser_grp.add_argument("--pillar-cells", type=int, default=world.pillar_cells, help="pillar side in cells")
    parser_grp.add_argument(
        "--min-geodesic", type=float, default=episode.min_geodesic, help="shortest allowed start-goal geodesic"
    )
    parser_grp.add_argument(
        "--max-geodesic", type=float, default=episode.max_geodesic, help="longest allowed start-goal geodesic"
    )
    parser_grp.add_argument(
        "--success-distance",
        type=float,
        default=episode.success_distance,
        help="geodesic distance to the goal within which stopping counts as success",
    )
    parser_grp.add_argument(
        "--max-retries", type=int, default=episode.max_retries, help="start/goal draws before sampling gives up"
    )
    parser_grp.add_argument(
        "--house-scale",
        action="store_true",
        help="use the 3 m success distance of house-scale scenes",
    )
    return parser


def get_policy_parser(overrides: bool = False) -> argparse.ArgumentParser:
    """The policy architecture and expressivity; these define the checkpoint digest."""
    config = PolicyConfig()
    parser = argparse.ArgumentParser(add_help=False)
    parser_grp = parser.add_argument_group(title="policy")
    parser_grp.add_argument(
        "-x",
        "--expressivity",
        type=str,
        default=config.expressivity,
        choices=list(EXPRESSIVITY_PRESETS),
        help="action space preset, letters give the (distance, offset) heads: c continuous, d discrete, fixed",
    )
    parser_grp.add_argument("--sector-dim", type=int, default=config.sector_dim, help="per-sector scan feature size")
    parser_grp.add_argument("--h-vis-dim", type=int, default=config.h_vis_dim, help="visual recurrence state size")
    parser_grp.add_argument("--h-a-dim", type=int, default=config.h_a_dim, help="action recurrence state size")
    parser_grp.add_argument(
        "--embedding-dim", type=int, default=config.embedding_dim, help="instruction token embedding size"
    )
    parser_grp.add_argument(
        "--use-pose-features",
        action=argparse.BooleanOptionalAction,
        default=config.use_pose_features,
        help="append the sine and cosine of each sector's heading to its features",
    )
    parser_grp.add_argument(
        "--use-goal-hint",
        action=argparse.BooleanOptionalAction,
        default=config.use_goal_hint,
        help="observe the goal bearing and straight-line distance per sector",
    )
    parser_grp.add_argument("--max-range", type=float, default=config.max_range, help="range scan cutoff in meters")
    parser_grp.add_argument(
        "--allow-digest-mismatch",
        action="store_true",
        help="load checkpoints whose config digest differs from the one requested, with a warning",
    )
    return parser


def get_navigation_parser(overrides: bool = False) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser_grp = parser.add_argument_group(title="navigation")
    parser_grp.add_argument(
        "-n",
        "--navigator",
        type=str,
        default="cn",
        choices=NAVIGATOR_CHOICES,
        help="low-level navigator: `cn` rotates and translates exactly, `dn` takes 15° turns and 0.25 m steps",
    )
    parser_grp.add_argument("--step-cap", type=int, default=20, help="waypoint decisions before an episode times out")
    parser_grp.add_argument(
        "--evaluation-name",
        type=str,
        default=None,
        help="directory name of the evaluation, defaults to `eval_<NAVIGATOR>`",
    )
    return parser


def get_motion_parser(overrides: bool = False) -> argparse.ArgumentParser:
    """The robot motion model; explicit coefficients override the chosen profile's fits."""
    parser = argparse.ArgumentParser(add_help=False)
    parser_grp = parser.add_argument_group(title="motion model")
    parser_grp.add_argument(
        "--motion-profile",
        type=str,
        default="movebase",
        choices=list(MOTION_PROFILES),
        help="named rotate/translate time fits, only `movebase` ships coefficients",
    )
    for name, unit in (("rotate-a2", "s/deg²"), ("rotate-a1", "s/deg"), ("rotate-a0", "s")):
        parser_grp.add_argument(f"--{name}", type=float, default=None, help=f"rotate time coefficient ({unit})")
    for name, unit in (("translate-b1", "s/m"), ("translate-b0", "s")):
        parser_grp.add_argument(f"--{name}", type=float, default=None, help=f"translate time coefficient ({unit})")
    return parser


COMMON_PARSERS: Final[dict[str, Callable[..., argparse.ArgumentParser]]] = {
    "core": get_core_parser,
    "seed": get_seed_parser,
    "worlds": get_worlds_parser,
    "world": get_world_parser,
    "policy": get_policy_parser,
    "navigation": get_navigation_parser,
    "motion": get_motion_parser,
}
