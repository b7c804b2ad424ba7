from waypointnav.modules.evaluation.compare import compare_table
from waypointnav.modules.evaluation.evaluate import evaluate_checkpoint, oracle_times
from .run import run as run
from .run import run_compare as run_compare
