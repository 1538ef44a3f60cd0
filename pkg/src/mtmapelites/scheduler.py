"""Tournament task selection and UCB1 control of the tournament size."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tasks import TaskSet, closest_tasks_batch


def draw_tournaments(n_tasks: int, s: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` rows of ``s`` distinct task ids drawn uniformly from all tasks."""
    if not 1 <= s <= n_tasks:
        raise ValueError(f"tournament size {s} outside [1, {n_tasks}]")
    if s == 1:
        return rng.integers(n_tasks, size=(size, 1))
    if s == n_tasks:
        return np.broadcast_to(np.arange(n_tasks), (size, n_tasks))
    keys = rng.random((size, n_tasks))
    return np.argpartition(keys, s - 1, axis=1)[:, :s]


def tournament_select_batch(parent_task_ids: np.ndarray, task_set: TaskSet, s: int,
                            rng: np.random.Generator) -> np.ndarray:
    cands = draw_tournaments(len(task_set), s, len(parent_task_ids), rng)
    if s == 1:
        return cands[:, 0].copy()
    refs = task_set.params[parent_task_ids]
    return closest_tasks_batch(cands, refs, task_set.params)


def tournament_select_task(parent_task, task_set: TaskSet, s: int,
                           rng: np.random.Generator) -> int:
    """Closest of ``s`` random tasks (empty niches included) to ``parent_task``.

    ``parent_task`` is a task id or a :class:`TaskDescriptor`.
    """
    pid = int(getattr(parent_task, "id", parent_task))
    return int(tournament_select_batch(np.array([pid]), task_set, s, rng)[0])


def count_batch_successes(insert_results) -> int:
    return int(np.count_nonzero(np.asarray(insert_results, dtype=bool)))


@dataclass
class BanditState:
    sizes: list[int]
    batch_size: int = 1
    normalize: bool = True
    selected: np.ndarray = field(default=None)
    successes: np.ndarray = field(default=None)
    generation: int = 0
    current_arm: int = 0

    def __post_init__(self):
        k = len(self.sizes)
        if k == 0:
            raise ValueError("bandit needs at least one arm")
        if self.selected is None:
            self.selected = np.zeros(k, dtype=np.int64)
        if self.successes is None:
            self.successes = np.zeros(k, dtype=np.int64)

    def mean_rewards(self) -> np.ndarray:
        n = np.maximum(self.selected, 1)
        mu = self.successes / n
        if self.normalize:
            mu = mu / self.batch_size
        return mu


def ucb1_scores(state: BanditState) -> np.ndarray:
    g = max(state.generation, 1)
    return state.mean_rewards() + np.sqrt(2.0 * math.log(g) / state.selected)


def ucb1_select(state: BanditState) -> int:
    """Untried arms first (lowest index), then argmax of mean + sqrt(2 ln g / n)."""
    untried = np.flatnonzero(state.selected == 0)
    if untried.size:
        return int(untried[0])
    return int(np.argmax(ucb1_scores(state)))  # argmax keeps the first maximum


def bandit_update(state: BanditState, arm: int, batch_successes: int,
                  batch_size: int | None = None) -> BanditState:
    if not 0 <= arm < len(state.sizes):
        raise IndexError(f"arm {arm} out of range")
    if batch_size is not None and not 0 <= batch_successes <= batch_size:
        raise ValueError(f"{batch_successes} successes in a batch of {batch_size}")
    state.selected[arm] += 1
    state.successes[arm] += int(batch_successes)
    state.generation += 1
    state.current_arm = arm
    return state
