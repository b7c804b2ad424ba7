import argparse
import warnings
from pathlib import Path

from tqdm import tqdm

import waypointnav.common as common
import waypointnav.common.io as io
from waypointnav.common.io import resolve_experiment_dir
from waypointnav.modules.evaluation.compare import compare_table, load_summaries
from waypointnav.modules.evaluation.evaluate import evaluate_checkpoint, evaluation_digest
from waypointnav.modules.evaluation.io import (
    check_output_paths,
    checkpoint_location,
    evaluation_dir,
    write_evaluation_outputs,
)
from waypointnav.modules.metrics.motion import MotionModel
from waypointnav.modules.metrics.vln import MetricsReport, speed_bins, waypoint_statistics
from waypointnav.modules.policy.io import load_checkpoint
from waypointnav.modules.policy.network import PolicyConfig
from waypointnav.modules.world.io import episode_triples, load_required_data


def run(args: argparse.Namespace) -> argparse.Namespace:
    print("Running evaluate module...\033[32m")

    common.set_seed(args.seed)
    seed = args.seed if args.seed is not None else 0
    dir_experiment = resolve_experiment_dir(args)

    records = load_required_data(args, dir_experiment)
    path_checkpoint = checkpoint_location(args, dir_experiment)
    expected = PolicyConfig.from_args(args).digest()
    policy, _ = load_checkpoint(path_checkpoint, expected, args.allow_digest_mismatch)
    policy.eval()
    model = MotionModel.from_args(args)
    digest = evaluation_digest(policy.config.digest(), args.navigator, model)

    dir_evaluation = evaluation_dir(args, dir_experiment)
    check_output_paths(dir_evaluation, args.force)
    episodes = episode_triples(records)
    if not episodes:
        warnings.warn("There are no episodes to evaluate, writing an empty report", UserWarning)
    results, reports = evaluate_checkpoint(
        policy, episodes, args.navigator, model, args.step_cap, args.oracle, args.workers, args.ne_mode, seed
    )
    summary = {
        "label": policy.config.expressivity_config.label,
        "expressivity": policy.config.expressivity,
        "navigator": args.navigator,
        "oracle": args.oracle,
        "motion_model": model.to_dict(),
        "checkpoint": str(path_checkpoint),
        "checkpoint_digest": policy.config.digest(),
        "worlds_path": str((dir_experiment / args.worlds_dir).resolve()),
        "n_episodes": len(results),
        "aggregate": MetricsReport.aggregate(reports),
        "waypoint_statistics": waypoint_statistics(r.predicted_distances for r in results),
        "speed_bins": speed_bins(reports),
    }
    write_evaluation_outputs(results, reports, [s for s, _, _ in episodes], summary, digest, dir_evaluation)
    aggregate = summary["aggregate"]
    if aggregate:
        tqdm.write(
            f"{summary['label']} with {args.navigator.upper()}: SR {aggregate['SR']:.3f}, SPL {aggregate['SPL']:.3f}, "
            f"EET {aggregate['EET']:.1f}s over {len(results)} episodes"
        )

    if "render" in args.modules_to_run:
        args.module_handover.update({"evaluation": dir_evaluation})

    print("\033[0m")

    return args


def resolve_run(run: str, dir_experiment: Path) -> Path:
    """An evaluation directory given as a path, relative to the experiment, or relative to the output root."""
    for candidate in (Path(run), dir_experiment / run, io.output_root() / run):
        if candidate.is_dir():
            return candidate
    return Path(run)


def run_compare(args: argparse.Namespace) -> argparse.Namespace:
    print("Running compare module...\033[36m")

    dir_experiment = resolve_experiment_dir(args)
    summaries = load_summaries([resolve_run(r, dir_experiment) for r in args.runs])
    table = compare_table(summaries)
    fn_table = io.consistent_ending(args.comparison, ".csv")
    io.warn_if_path_supplied([fn_table], dir_experiment)
    io.guard_overwrite([dir_experiment / fn_table], args.force)
    digest = io.config_digest({"runs": sorted(s["digest"] for s in summaries)})
    io.write_csv(table, dir_experiment / fn_table, digest)
    tqdm.write(table.to_string(index=False, float_format=lambda v: f"{v:.2f}"))

    print("\033[0m")

    return args
