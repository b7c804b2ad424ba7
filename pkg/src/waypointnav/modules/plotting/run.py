import argparse

from tqdm import tqdm

import waypointnav.common.io as io
from waypointnav.common.io import resolve_experiment_dir
from waypointnav.modules.plotting.io import load_required_data
from waypointnav.modules.plotting.render import render_episode


def run(args: argparse.Namespace) -> argparse.Namespace:
    print("Running render module...\033[33m")

    dir_experiment = resolve_experiment_dir(args)
    dir_evaluation, grid, episode, digest = load_required_data(args, dir_experiment)
    path = dir_evaluation / io.consistent_ending(f"render_{episode.id}", ".svg")
    io.guard_overwrite([path], args.force)
    render_episode(grid, episode, path, digest)
    tqdm.write(f"Rendered {episode.id} to {path}")

    print("\033[0m")

    return args
