import argparse

from tqdm import tqdm

import waypointnav.common as common
from waypointnav.common.io import resolve_experiment_dir
from waypointnav.modules.policy.network import PolicyConfig, WaypointPolicy
from waypointnav.modules.trainer.config import PPOConfig, TrainConfig
from waypointnav.modules.trainer.io import check_output_paths, load_resume_state, write_training_outputs
from waypointnav.modules.trainer.trainer import train
from waypointnav.modules.world.generation import EpisodeParams, WorldParams
from waypointnav.modules.world.io import episode_triples, load_required_data


def run(args: argparse.Namespace) -> argparse.Namespace:
    print("Running train module...\033[34m")

    common.set_seed(args.seed)
    seed = args.seed if args.seed is not None else 0
    dir_experiment = resolve_experiment_dir(args)

    records = load_required_data(args, dir_experiment)
    dir_checkpoints = check_output_paths(args, dir_experiment)
    config = PolicyConfig.from_args(args)
    ppo, train_config = PPOConfig.from_args(args), TrainConfig.from_args(args)
    episode_params = EpisodeParams.from_args(args)
    if episode_params.success_distance != ppo.success_distance:
        ppo = PPOConfig(**{**ppo.to_dict(), "success_distance": episode_params.success_distance})

    policy, resume = load_resume_state(args, dir_experiment, config)
    policy = policy or WaypointPolicy(config)
    run_state, log = train(
        policy,
        ppo,
        train_config,
        WorldParams.from_args(args),
        episode_params,
        episode_triples(records),
        dir_checkpoints,
        seed,
        resume,
    )
    summary = {
        "best_spl": run_state.best_spl if run_state.best_update >= 0 else None,
        "best_update": run_state.best_update,
        "steps": run_state.step,
        "updates": run_state.update,
        "env_seeds": run_state.env_seeds,
        "policy": config.to_dict(),
        "ppo": ppo.to_dict(),
        "train": train_config.to_dict(),
    }
    write_training_outputs(log, summary, config.digest(), dir_experiment, args)
    if run_state.best_update >= 0:
        tqdm.write(f"Best validation SPL {run_state.best_spl:.3f} at update {run_state.best_update}")

    if "evaluate" in args.modules_to_run:
        args.module_handover.update({"checkpoint": dir_checkpoints / "best.pt"})

    print("\033[0m")

    return args
