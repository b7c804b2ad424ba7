import argparse
from pathlib import Path
from typing import Optional

import waypointnav.common.io as io
from waypointnav.modules.evaluation.evaluate import LoggedEpisode
from waypointnav.modules.evaluation.io import RESULTS_LOG, SUMMARY, evaluation_dir, read_results_log
from waypointnav.modules.world.grid import OccupancyGrid
from waypointnav.modules.world.io import read_world, world_filename


def find_episode(episodes: list[LoggedEpisode], episode_id: Optional[str]) -> LoggedEpisode:
    """
    The logged episode with `episode_id`, or the first one when no id is given.

    Raises:
        ValueError: If the log is empty or holds no such episode.
    """
    if not episodes:
        raise ValueError("The evaluation log holds no episodes")
    if episode_id is None:
        return episodes[0]
    for episode in episodes:
        if episode.id == episode_id:
            return episode
    raise ValueError(f"No episode '{episode_id}' in the evaluation log, it holds e.g. {[e.id for e in episodes[:3]]}")


def load_required_data(
    args: argparse.Namespace, dir_experiment: Path
) -> tuple[Path, OccupancyGrid, LoggedEpisode, str]:
    """
    Loads the evaluation handed over by `evaluate` in the same pipeline, or the one named by the arguments.

    Returns:
        The evaluation directory, the episode's world, the logged episode and the evaluation digest.
    """
    if "evaluation" in args.module_handover:
        dir_evaluation = Path(args.module_handover["evaluation"])
    else:
        dir_evaluation = evaluation_dir(args, dir_experiment)
    io.check_exists([RESULTS_LOG, SUMMARY], dir_evaluation)
    summary = io.read_json(dir_evaluation / SUMMARY)
    episode = find_episode(read_results_log(dir_evaluation / RESULTS_LOG), args.episode_id)
    dir_worlds = Path(summary["worlds_path"])
    if not (dir_worlds / world_filename(episode.world_seed)).exists():
        dir_worlds = dir_experiment / args.worlds_dir
    io.check_exists([world_filename(episode.world_seed)], dir_worlds)
    record = read_world(dir_worlds / world_filename(episode.world_seed))
    return dir_evaluation, record.grid, episode, summary["digest"]
