"""Multi-task MAP-Elites: one elite per task across many related tasks."""

__version__ = "0.1.0"

from .core import Archive, Elite, RunConfig, TaskDescriptor, archive_insert, archive_stats
from .domains import ArmDomain, SyntheticDomain
from .engine import (RunLog, run, run_es_per_task, run_me_all_tasks, run_me_random_task,
                     run_mtme, run_random_sampling)
from .estimator import MultiTaskMAPElites
from .stats import mann_whitney_u
from .tasks import TaskSet, generate_cvt, generate_uniform

__all__ = [
    "Archive", "Elite", "RunConfig", "TaskDescriptor", "archive_insert", "archive_stats",
    "ArmDomain", "SyntheticDomain", "RunLog", "run", "run_mtme", "run_me_random_task",
    "run_me_all_tasks", "run_random_sampling", "run_es_per_task", "MultiTaskMAPElites",
    "mann_whitney_u", "TaskSet", "generate_cvt", "generate_uniform",
]
