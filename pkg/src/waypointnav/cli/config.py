"""YAML run configs: resolving, merging them with CLI overrides, running them, and saving the config of a run."""

import argparse
import warnings
from pathlib import Path
from typing import Any, Callable, Final

import yaml

from waypointnav.cli.module_setup import MODULE_MAP, PIPELINE, run_pipeline
from waypointnav.common.common import get_version
from waypointnav.common.dicts import filter_dict, flatten_dict, get_key_by_value
from waypointnav.common.io import resolve_experiment_dir

CONFIG_DIR: Final = Path("config")
# nested sections whose name prefixes their keys, e.g. `rotate: {a2: ...}` -> `rotate_a2`
JOINED_SECTIONS: Final = {"rotate", "translate"}
# kept at the top level of a written config rather than under a module
TOP_LEVEL_ARGS: Final = {"version", "experiment_name", "out", "seed", "save_config", "force"}
# bookkeeping entries of a run's namespace that never belong in a config file
RUNTIME_ARGS: Final = {"func", "save_config", "module_handover", "input_config", "custom_pipeline"}
NO_SEED_WARNING: Final = "No seed has been specified, meaning the results of this run may not be reproducible."


def resolve_config_path(config: str) -> Path:
    """
    A config given as a path, or as a bare name resolved to `config/<name>.yaml`.

    Raises:
        FileNotFoundError: If neither exists.
    """
    path = Path(config)
    if path.is_file():
        return path
    named = CONFIG_DIR / f"{path.stem if path.suffix in {'.yaml', '.yml'} else config}.yaml"
    if named.is_file():
        return named
    raise FileNotFoundError(f"No config file at '{path}' or '{named}'")


def load_config_file(config: str) -> dict[str, Any]:
    """
    Raises:
        FileNotFoundError: If the config cannot be resolved.
        ValueError: If the file does not hold a YAML mapping.
    """
    with open(resolve_config_path(config)) as stream:
        config_dict = yaml.safe_load(stream) or {}
    if not isinstance(config_dict, dict):
        raise ValueError(f"The config file '{config}' must hold a YAML mapping")
    return config_dict


def infer_modules_to_run(config_dict: dict[str, Any], valid: list[str], custom_order: bool, source: str) -> list[str]:
    """
    The modules a config runs: the whole `PIPELINE` for `run_type: pipeline`, else the `run_type` module plus every
    module with a section, in pipeline order unless `custom_order` keeps the file's order. A config naming no module
    falls back to the pipeline.
    """
    run_type = config_dict.pop("run_type", None)
    if run_type == "pipeline":
        return PIPELINE
    named = [k for k in [*config_dict, run_type] if k in valid and k != "pipeline"]
    modules = list(dict.fromkeys(named))
    if not custom_order:
        order = PIPELINE + sorted(set(valid) - set(PIPELINE))
        modules.sort(key=order.index)
    if not modules:
        warnings.warn(f"'{source}' names no module and no valid `run_type`, running the full pipeline")
        return PIPELINE
    return modules


def get_default_and_required_args(
    top_parser: argparse.ArgumentParser,
    module_parsers: dict[str, argparse.ArgumentParser],
) -> tuple[dict[str, Any], list[dict[str, str]]]:
    """
    Scrape every option's default from the top-level parser and the given module parsers.

    Returns:
        The defaults by destination, and the required options as `{"arg": dest, "module": name}` records.
    """
    parsers = {"top-level": top_parser, **module_parsers}
    defaults: dict[str, Any] = {}
    required: list[dict[str, str]] = []
    for module, parser in parsers.items():
        for action in parser._actions:
            if action.dest in ("help", argparse.SUPPRESS):
                continue
            defaults[action.dest] = action.default
            if action.required:
                required.append({"arg": action.dest, "module": module})
    return defaults, required


def read_config(
    args: argparse.Namespace,
    parser: argparse.ArgumentParser,
    all_subparsers: dict[str, argparse.ArgumentParser],
) -> argparse.Namespace:
    """
    Run the modules a config file asks for. Settings are layered: parser defaults of the modules that run, then the
    file, then whichever command-line options differ from their defaults.

    Args:
        args: The parsed `config` command line.
        parser: The top-level parser.
        all_subparsers: Every command's parser by name.

    Returns:
        The namespace after the last module ran.

    Raises:
        ValueError: If the file is not a mapping or leaves a required option unset.
    """
    config_dict = load_config_file(args.input_config)
    version = config_dict.pop("version", None) or get_version()
    if version != get_version():
        warnings.warn(
            f"This config was written by waypointnav {version} but {get_version()} is installed, results may differ."
        )

    valid = [name for name in all_subparsers if name != "config"]
    modules_to_run = infer_modules_to_run(config_dict, valid, args.custom_pipeline, args.input_config)
    defaults, required = get_default_and_required_args(
        parser, filter_dict(all_subparsers, modules_to_run, include=True)
    )
    overrides = {
        k: v
        for k, v in vars(args).items()
        if k in ("input_config", "custom_pipeline") or (k in defaults and k != "func" and v != defaults[k])
    }
    merged = {**defaults, **flatten_dict(config_dict, JOINED_SECTIONS), **overrides}

    missing = [f"{r['module']}:{r['arg']}" for r in required if not merged.get(r["arg"])]
    if missing:
        raise ValueError(f"Required arguments are missing from the passed config file: {missing}")
    if merged.get("seed") is None:
        warnings.warn(NO_SEED_WARNING)

    run_args = argparse.Namespace(**merged, version=version, modules_to_run=modules_to_run, module_handover={})
    for module in modules_to_run:
        run_args = MODULE_MAP[module](run_args)
    return run_args


def get_modules_to_run(executor: Callable) -> list[str]:
    """The modules a CLI executor function runs: the whole `PIPELINE`, or the single module it belongs to."""
    if executor == run_pipeline:
        return PIPELINE
    return [get_key_by_value({name: mc.func for name, mc in MODULE_MAP.items()}, executor)]


def assemble_config(
    args: argparse.Namespace,
    all_subparsers: dict[str, argparse.ArgumentParser],
) -> dict[str, Any]:
    """
    Lay out a run's settings as a config file would: `run_type`, the top-level options, then one section per module
    holding the options its parser declares. Unset (`None`) options are left out.
    """
    remaining = filter_dict(vars(args), RUNTIME_ARGS)
    modules_to_run = remaining.pop("modules_to_run")
    if len(modules_to_run) == 1:
        run_type = modules_to_run[0]
    elif modules_to_run == PIPELINE:
        run_type = "pipeline"
    else:
        run_type = None

    sections: dict[str, dict[str, Any]] = {}
    for module in modules_to_run:
        declared = {action.dest for action in all_subparsers[module]._actions} - {"help"} - TOP_LEVEL_ARGS
        for key in [k for k in remaining if k in declared]:
            value = remaining.pop(key)
            if value is not None:
                sections.setdefault(module, {})[key] = value

    top_level = {k: v for k, v in remaining.items() if k in TOP_LEVEL_ARGS and v is not None}
    return {**({"run_type": run_type} if run_type else {}), **top_level, **sections}


def write_config(
    args: argparse.Namespace,
    all_subparsers: dict[str, argparse.ArgumentParser],
) -> None:
    """Save the run's settings to `config_<EXPERIMENT_NAME>.yaml` in its experiment directory."""
    config = assemble_config(args, all_subparsers)
    config.setdefault("version", get_version())
    path = resolve_experiment_dir(args) / f"config_{args.experiment_name}.yaml"
    with open(path, "w") as f:
        yaml.dump(config, f, default_flow_style=False, sort_keys=False)
