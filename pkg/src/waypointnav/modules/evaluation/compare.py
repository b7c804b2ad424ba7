import warnings
from pathlib import Path
from typing import Any, Sequence

import pandas as pd

import waypointnav.common.io as io

PERCENT_COLUMNS = ("OS", "SR", "SPL", "SCT")
TABLE_COLUMNS = [
    "config",
    "navigator",
    "TL",
    "NE",
    "OS",
    "SR",
    "SPL",
    "EET",
    "SCT",
    "commands",
    "decisions",
    "speed",
    "command_ratio",
]


def load_summaries(dirs: Sequence[Path]) -> list[dict[str, Any]]:
    """The evaluation summaries found in `dirs`; directories without one are skipped with a warning."""
    summaries = []
    for directory in dirs:
        path = Path(directory) / "summary.json"
        if not path.exists():
            warnings.warn(f"No evaluation summary at {path}, omitting this run from the comparison", UserWarning)
            continue
        summaries.append(io.read_json(path))
    return summaries


def compare_table(summaries: Sequence[dict[str, Any]]) -> pd.DataFrame:
    """
    One row per (expressivity, navigator) evaluation: the mean metrics with OS, SR, SPL and SCT as percentages,
    commands and decisions per episode, the speed TL/EET, and the commands per episode relative to the first row.
    """
    rows = []
    for summary in summaries:
        aggregate = summary.get("aggregate") or {}
        row = {
            "config": summary["label"],
            "navigator": summary["navigator"],
            **{c: aggregate.get(c, float("nan")) for c in ("TL", "NE", "OS", "SR", "SPL", "EET", "SCT")},
            "commands": aggregate.get("n_commands", float("nan")),
            "decisions": aggregate.get("decision_count", float("nan")),
            "speed": aggregate.get("speed", float("nan")),
        }
        for c in PERCENT_COLUMNS:
            row[c] = 100 * row[c]
        rows.append(row)
    table = pd.DataFrame(rows, columns=TABLE_COLUMNS[:-1])
    table["command_ratio"] = table["commands"] / table["commands"].iloc[0] if len(table) else []
    return table
