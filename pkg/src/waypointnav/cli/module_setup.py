"""The CLI-reachable modules, their parsers, the default pipeline and the `config` and `pipeline` option trees."""

import argparse
from dataclasses import dataclass, field
from typing import Callable, Final, Optional

import waypointnav.cli.module_arguments as ma
import waypointnav.modules as m
from waypointnav.cli.common_arguments import COMMON_PARSERS

# option trees assembled from every module rather than declaring their own
META_COMMANDS: Final = frozenset({"pipeline", "config"})


@dataclass(eq=False)
class ModuleConfig:
    """
    How one CLI command is wired up.

    Attributes:
        func: Runs the module on the parsed arguments and returns them, possibly extended for later modules.
        add_args: Adds the module's own options to its sub-parser.
        description: Shown by `waypointnav <command> --help`.
        help: The one-liner in the top-level command list.
        common_parsers: Names from `COMMON_PARSERS` the command shares with others. `core` and (unless `no_seed`)
            `seed` are prepended automatically.
        no_seed: Leave out the `--seed` option, for commands that involve no randomness.
    """

    func: Optional[Callable[..., argparse.Namespace]]
    add_args: Callable[..., None]
    description: str
    help: str
    common_parsers: list[str] = field(default_factory=list)
    no_seed: bool = False

    def __post_init__(self) -> None:
        unknown = set(self.common_parsers) - COMMON_PARSERS.keys()
        assert not unknown, f"Unknown common parser(s) {sorted(unknown)}"
        assert not {"core", "seed"} & set(self.common_parsers), "`core` and `seed` are added automatically"
        self.common_parsers = ["core"] + ([] if self.no_seed else ["seed"]) + list(self.common_parsers)

    def __call__(self, args: argparse.Namespace) -> argparse.Namespace:
        return self.func(args)


def run_pipeline(args: argparse.Namespace) -> argparse.Namespace:
    """Run each `PIPELINE` module in turn, threading `args` (and its handover) through them."""
    print("Running the generate -> train -> evaluate pipeline...")
    args.modules_to_run = PIPELINE
    for module_name in PIPELINE:
        args = MODULE_MAP[module_name](args)
    return args


def add_pipeline_args(parser: argparse.ArgumentParser) -> None:
    """Give `parser` the own options of every `PIPELINE` module."""
    for module_name in PIPELINE:
        MODULE_MAP[module_name].add_args(parser, f"{module_name} options")


def add_config_args(parser: argparse.ArgumentParser) -> None:
    """The `config` command: the file to run, plus every module's options as optional overrides of it."""
    parser.add_argument(
        "-c",
        "--config",
        dest="input_config",
        required=True,
        help="the config file, either a path or the name of a file in `config/`",
    )
    parser.add_argument(
        "-cp",
        "--custom-pipeline",
        action="store_true",
        help="run the modules in the order the config file lists them rather than in pipeline order",
    )
    for module_name in PIPELINE + sorted(VALID_MODULES - set(PIPELINE)):
        MODULE_MAP[module_name].add_args(parser, f"{module_name} option overrides", overrides=True)


# commands and their parsers, new modules are registered here

PIPELINE: Final = [
    "generate",
    "train",
    "evaluate",
]  # the order of a pipeline run

MODULE_MAP: Final = {
    "generate": ModuleConfig(
        func=m.world.run,
        add_args=ma.add_generate_args,
        description="run the generate module, to write held-out worlds and their start/goal episodes",
        help="generate worlds and episodes",
        common_parsers=["worlds", "world"],
    ),
    "train": ModuleConfig(
        func=m.trainer.run,
        add_args=ma.add_train_args,
        description="run the train module, to fit a waypoint policy with PPO on procedurally generated worlds",
        help="train a policy",
        common_parsers=["worlds", "world", "policy", "navigation"],
    ),
    "evaluate": ModuleConfig(
        func=m.evaluation.run,
        add_args=ma.add_evaluate_args,
        description="run the evaluate module, to score a checkpoint greedily on the held-out episodes with a navigator",
        help="evaluate a checkpoint",
        common_parsers=["worlds", "policy", "navigation", "motion"],
    ),
    "compare": ModuleConfig(
        func=m.evaluation.run_compare,
        add_args=ma.add_compare_args,
        description="run the compare module, to tabulate a set of evaluations by expressivity and navigator",
        help="compare evaluations",
        no_seed=True,
    ),
    "render": ModuleConfig(
        func=m.plotting.run,
        add_args=ma.add_render_args,
        description="run the render module, to draw an evaluated episode as an SVG map",
        help="render an episode",
        common_parsers=["worlds", "navigation"],
    ),
    "pipeline": ModuleConfig(
        func=run_pipeline,
        add_args=add_pipeline_args,
        description="run generate, train and evaluate back to back with one set of options",
        help="generate, train and evaluate in one go",
    ),
    "config": ModuleConfig(
        func=None,
        add_args=add_config_args,
        description="run the module(s) named in a YAML config file, any usual CLI flag overrides the file",
        help="run module(s) from a YAML config file",
    ),
}

VALID_MODULES: Final = frozenset(MODULE_MAP) - META_COMMANDS

assert set(PIPELINE) <= VALID_MODULES, f"`PIPELINE` may only name modules from {sorted(VALID_MODULES)}"


def get_parent_parsers(name: str, module_parsers: list[str]) -> list[argparse.ArgumentParser]:
    """
    The shared parsers a command inherits: its own `common_parsers`, or all of them for `pipeline` and `config`,
    where `config` builds them in override mode so nothing is required on the command line.
    """
    if name in META_COMMANDS:
        return [make_parser(name == "config") for make_parser in COMMON_PARSERS.values()]
    return [COMMON_PARSERS[parser_name]() for parser_name in module_parsers]


def add_subparser(
    subparsers: argparse._SubParsersAction,
    name: str,
    module_config: ModuleConfig,
) -> argparse.ArgumentParser:
    """
    Register command `name` with its shared and own options, dispatching to `module_config.func`.

    Returns:
        The command's parser, which `config` runs consult for defaults.
    """
    parser = subparsers.add_parser(
        name=name,
        description=module_config.description,
        help=module_config.help,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        parents=get_parent_parsers(name, module_config.common_parsers),
    )
    if name in META_COMMANDS:
        module_config.add_args(parser)
    else:
        module_config.add_args(parser, f"{name} options")
    parser.set_defaults(func=module_config.func)
    return parser
