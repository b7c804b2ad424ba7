"""Define arguments for each of the modules' CLI sub-parsers."""

import argparse

from waypointnav.modules.evaluation.evaluate import ORACLES
from waypointnav.modules.metrics.vln import NE_MODES
from waypointnav.modules.trainer.config import PPOConfig, TrainConfig


def add_generate_args(parser: argparse.ArgumentParser, group_title: str, overrides: bool = False) -> None:
    """Adds arguments to an existing generate module sub-parser instance."""
    group = parser.add_argument_group(title=group_title)
    group.add_argument(
        "--n-worlds",
        type=int,
        default=100,
        help="number of worlds to generate, with seeds `<SEED>` to `<SEED> + <N_WORLDS> - 1`",
    )
    group.add_argument(
        "--episodes-per-world",
        type=int,
        default=2,
        help="number of start/goal episodes to sample in each world",
    )


def add_train_args(parser: argparse.ArgumentParser, group_title: str, overrides: bool = False) -> None:
    """Adds arguments to an existing train module sub-parser instance."""
    ppo, train = PPOConfig(), TrainConfig()
    group = parser.add_argument_group(title=group_title)
    group.add_argument("--total-steps", type=int, default=train.total_steps, help="waypoint decisions to train for")
    group.add_argument("--n-envs", type=int, default=ppo.n_envs, help="parallel training environments")
    group.add_argument("--rollout-length", type=int, default=ppo.rollout_length, help="steps per env per rollout")
    group.add_argument("--ppo-epochs", type=int, default=ppo.ppo_epochs, help="passes over each rollout")
    group.add_argument("--minibatches", type=int, default=ppo.minibatches, help="minibatches per epoch")
    group.add_argument("--learning-rate", type=float, default=ppo.learning_rate, help="Adam learning rate")
    group.add_argument("--adam-epsilon", type=float, default=ppo.adam_epsilon, help="Adam epsilon")
    group.add_argument("--clip", type=float, default=ppo.clip, help="PPO ratio clip")
    group.add_argument(
        "--value-clip",
        action=argparse.BooleanOptionalAction,
        default=ppo.value_clip,
        help="clip the value loss around the rollout values",
    )
    group.add_argument("--gamma", type=float, default=ppo.gamma, help="discount factor")
    group.add_argument("--tau", type=float, default=ppo.tau, help="GAE parameter")
    group.add_argument("--c-v", type=float, default=ppo.c_v, help="value loss weight")
    group.add_argument("--c-r", type=float, default=ppo.c_r, help="offset regulariser weight")
    group.add_argument("--c-e", type=float, default=ppo.c_e, help="entropy bonus weight")
    group.add_argument("--c-p", type=float, default=ppo.c_p, help="pano entropy weight")
    group.add_argument("--c-o", type=float, default=ppo.c_o, help="offset entropy weight")
    group.add_argument("--c-d", type=float, default=ppo.c_d, help="distance entropy weight")
    group.add_argument("--max-grad-norm", type=float, default=ppo.max_grad_norm, help="gradient norm clip")
    group.add_argument("--r-success", type=float, default=ppo.r_success, help="reward for a successful stop")
    group.add_argument(
        "--slack-scalar",
        type=float,
        default=ppo.slack_scalar,
        help="per-step slack reward, scaled by the predicted waypoint distance",
    )
    group.add_argument(
        "--normalize-advantages",
        action=argparse.BooleanOptionalAction,
        default=ppo.normalize_advantages,
        help="standardise advantages over each rollout",
    )
    group.add_argument(
        "--eval-interval", type=int, default=train.eval_interval, help="updates between validation evaluations"
    )
    group.add_argument(
        "--n-eval-episodes",
        type=int,
        default=train.n_eval_episodes,
        help="held-out episodes per validation evaluation, 0 uses all of them",
    )
    group.add_argument(
        "--n-train-worlds", type=int, default=train.n_train_worlds, help="procedurally generated training worlds"
    )
    group.add_argument(
        "--train-world-seed",
        type=int,
        default=train.train_world_seed,
        help="seed of the first training world, must not overlap the held-out world seeds",
    )
    group.add_argument("--resume", action="store_true", help="continue from `checkpoints/latest.pt`")
    group.add_argument(
        "--training-log",
        type=str,
        default="training_log",
        help="filename of the per-update training log",
    )


def add_evaluate_args(parser: argparse.ArgumentParser, group_title: str, overrides: bool = False) -> None:
    """Adds arguments to an existing evaluate module sub-parser instance."""
    group = parser.add_argument_group(title=group_title)
    group.add_argument(
        "--checkpoint",
        type=str,
        default="checkpoints/best.pt",
        help="the checkpoint to evaluate, relative to the experiment directory",
    )
    group.add_argument(
        "--oracle",
        type=str,
        default=None,
        choices=ORACLES,
        help="minimal-time planner for the SCT oracle times, without one SCT is reported as NaN",
    )
    group.add_argument("--workers", type=int, default=1, help="processes for oracle planning")
    group.add_argument(
        "--ne-mode",
        type=str,
        default="geodesic",
        choices=NE_MODES,
        help="distance used for the navigation error",
    )


def add_compare_args(parser: argparse.ArgumentParser, group_title: str, overrides: bool = False) -> None:
    """Adds arguments to an existing compare module sub-parser instance."""
    group = parser.add_argument_group(title=group_title)
    group.add_argument(
        "--runs",
        type=str,
        nargs="+",
        required=not overrides,
        help="evaluation directories to tabulate, as paths or relative to the experiment directory",
    )
    group.add_argument(
        "--comparison",
        type=str,
        default="comparison",
        help="filename of the comparison table",
    )


def add_render_args(parser: argparse.ArgumentParser, group_title: str, overrides: bool = False) -> None:
    """Adds arguments to an existing render module sub-parser instance."""
    group = parser.add_argument_group(title=group_title)
    group.add_argument(
        "--episode-id",
        type=str,
        default=None,
        help="the episode to draw, defaults to the first one in the evaluation log",
    )
