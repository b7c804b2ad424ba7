import argparse

from tqdm import tqdm

import waypointnav.common as common
from waypointnav.common.common import derive_seed
from waypointnav.common.io import resolve_experiment_dir
from waypointnav.modules.world.generation import (
    EpisodeParams,
    WorldParams,
    generate_episode,
    generate_world,
    world_digest,
)
from waypointnav.modules.world.io import WorldRecord, check_output_paths, write_world


def generate_records(
    seed: int, n_worlds: int, episodes_per_world: int, world_params: WorldParams, episode_params: EpisodeParams
) -> list[WorldRecord]:
    """
    Generate worlds `seed`, ..., `seed + n_worlds - 1`, each with `episodes_per_world` episodes whose seeds are
    derived from the world seed and the episode index.
    """
    digest = world_digest(world_params, episode_params)
    records = []
    for world_seed in tqdm(range(seed, seed + n_worlds), desc="Generating worlds", unit="world", leave=False):
        grid = generate_world(world_seed, world_params)
        episodes = tuple(
            generate_episode(grid, derive_seed(world_seed, e), episode_params, f"w{world_seed}-e{e}")
            for e in range(episodes_per_world)
        )
        records.append(WorldRecord(world_seed, grid, episodes, digest))
    return records


def run(args: argparse.Namespace) -> argparse.Namespace:
    print("Running generate module...\033[35m")

    common.set_seed(args.seed)
    args.seed = args.seed if args.seed is not None else 0
    dir_experiment = resolve_experiment_dir(args)

    paths = check_output_paths(args, dir_experiment)
    records = generate_records(
        args.seed, args.n_worlds, args.episodes_per_world, WorldParams.from_args(args), EpisodeParams.from_args(args)
    )
    for record, path in zip(records, paths):
        write_world(record, path)
    n_episodes = sum(len(r.episodes) for r in records)
    tqdm.write(f"Wrote {len(records)} worlds with {n_episodes} episodes to {dir_experiment / args.worlds_dir}")

    if "train" in args.modules_to_run or "evaluate" in args.modules_to_run:
        args.module_handover.update({"worlds": records})

    print("\033[0m")

    return args
