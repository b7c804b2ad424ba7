"""Top-down SVG maps of evaluated episodes."""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from waypointnav.common.common import get_version  # noqa: E402
from waypointnav.modules.evaluation.evaluate import LoggedEpisode  # noqa: E402
from waypointnav.modules.world.grid import OccupancyGrid  # noqa: E402

# free space gray, obstacles dark
GRID_COLOURS = ListedColormap(["#d9d9d9", "#303030"])
START_COLOUR = "tab:blue"
GOAL_COLOUR = "tab:red"
PATH_COLOUR = "black"
DECISION_COLOUR = "tab:orange"


def render_episode(grid: OccupancyGrid, episode: LoggedEpisode, path: Path, digest: str) -> None:
    """
    Draw `episode` over its world and save it as SVG: free space in gray, the start as a blue square, the goal as a
    red square, the executed path as a polyline and one heading arrow per waypoint decision (with SVG id
    `decision-<k>`). The output is byte-identical for identical inputs.

    Args:
        grid: The world the episode ran in.
        episode: The logged episode.
        path: The SVG file to write.
        digest: The evaluation digest stamped into the SVG metadata.
    """
    extent = (0.0, grid.width_cells * grid.resolution, 0.0, grid.height_cells * grid.resolution)
    with plt.rc_context({"svg.hashsalt": "waypointnav", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 6 * grid.height_cells / grid.width_cells))
        ax.imshow(
            np.asarray(grid.blocked, dtype=int),
            cmap=GRID_COLOURS,
            origin="lower",
            extent=extent,
            interpolation="nearest",
            vmin=0,
            vmax=1,
        )
        xs, ys = zip(*episode.path)
        ax.plot(xs, ys, color=PATH_COLOUR, linewidth=1.5, gid="path")
        arrow = 2 * grid.resolution
        for k, pose in enumerate(episode.decision_poses):
            ax.arrow(
                pose.x,
                pose.y,
                arrow * math.cos(pose.heading),
                arrow * math.sin(pose.heading),
                width=grid.resolution / 8,
                color=DECISION_COLOUR,
                length_includes_head=True,
                gid=f"decision-{k}",
            )
        ax.plot(*episode.start.position, marker="s", markersize=9, color=START_COLOUR, linestyle="none", gid="start")
        ax.plot(*episode.goal, marker="s", markersize=9, color=GOAL_COLOUR, linestyle="none", gid="goal")
        ax.set_xlim(extent[0], extent[1])
        ax.set_ylim(extent[2], extent[3])
        ax.set_aspect("equal")
        ax.set_title(f"{episode.id} ({'success' if episode.success else 'failure'})")
        ax.set_xticks([])
        ax.set_yticks([])
        fig.savefig(
            path,
            format="svg",
            metadata={"Date": None, "Creator": f"waypointnav {get_version()}", "Description": f"digest={digest}"},
        )
        plt.close(fig)
