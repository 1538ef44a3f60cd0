"""Shared domain types and the per-task elite archive."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

METHODS = ("mtme", "me_random_task", "me_all_tasks", "random_sampling", "es_per_task")

DEFAULT_TOURNAMENT_SIZES = (1, 5, 10, 50, 100, 500, 1000)


def fmt_float(x: float) -> str:
    """Decimal text that parses back to the identical double."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class TaskDescriptor:
    id: int
    params: np.ndarray


@dataclass
class Elite:
    genome: np.ndarray
    fitness: float
    eval_count_at_insert: int


class ArchiveStats(NamedTuple):
    coverage: float
    mean_fitness: Optional[float]
    max_fitness: Optional[float]


class Archive:
    """Dense map from task index to the best (genome, fitness) found for it.

    Slots are stored as parallel arrays; ``fitness`` of an empty slot is
    ``-inf`` and ``filled`` tells the two apart.  The sum of the filled
    fitness values is tracked incrementally (compensated summation) so the
    mean over the map is O(1) to read during a run.
    """

    def __init__(self, n_tasks: int, d_genome: int):
        if n_tasks < 1 or d_genome < 1:
            raise ValueError("archive needs at least one task and one genome dimension")
        self.n_tasks = int(n_tasks)
        self.d_genome = int(d_genome)
        self.genomes = np.zeros((n_tasks, d_genome))
        self.fitness = np.full(n_tasks, -np.inf)
        self.filled = np.zeros(n_tasks, dtype=bool)
        self.eval_index = np.full(n_tasks, -1, dtype=np.int64)
        self.filled_count = 0
        self._sum = 0.0
        self._comp = 0.0

    def _accumulate(self, x: float) -> None:
        # Neumaier summation
        t = self._sum + x
        if abs(self._sum) >= abs(x):
            self._comp += (self._sum - t) + x
        else:
            self._comp += (x - t) + self._sum
        self._sum = t

    @property
    def fitness_sum(self) -> float:
        return self._sum + self._comp

    def insert(self, task_id: int, genome, fitness: float, eval_count: int = 0) -> bool:
        if not 0 <= task_id < self.n_tasks:
            raise IndexError(f"task_id {task_id} out of range [0, {self.n_tasks})")
        fitness = float(fitness)
        if not math.isfinite(fitness):
            raise ValueError(f"non-finite fitness {fitness!r} rejected")
        if self.filled[task_id]:
            old = self.fitness[task_id]
            if not fitness > old:
                return False
            self._accumulate(-old)
        else:
            self.filled[task_id] = True
            self.filled_count += 1
        self._accumulate(fitness)
        self.genomes[task_id] = genome
        self.fitness[task_id] = fitness
        self.eval_index[task_id] = eval_count
        return True

    def __len__(self) -> int:
        return self.n_tasks

    def __getitem__(self, task_id: int) -> Optional[Elite]:
        if not self.filled[task_id]:
            return None
        return Elite(self.genomes[task_id].copy(), float(self.fitness[task_id]),
                     int(self.eval_index[task_id]))

    def filled_ids(self) -> np.ndarray:
        return np.flatnonzero(self.filled)

    def items(self) -> Iterator[tuple[int, Elite]]:
        for i in self.filled_ids():
            yield int(i), self[int(i)]

    def stats(self) -> ArchiveStats:
        if self.filled_count == 0:
            return ArchiveStats(0.0, None, None)
        return ArchiveStats(
            self.filled_count / self.n_tasks,
            self.fitness_sum / self.filled_count,
            float(self.fitness[self.filled].max()),
        )

    def copy(self) -> "Archive":
        other = Archive(self.n_tasks, self.d_genome)
        other.genomes = self.genomes.copy()
        other.fitness = self.fitness.copy()
        other.filled = self.filled.copy()
        other.eval_index = self.eval_index.copy()
        other.filled_count = self.filled_count
        other._sum, other._comp = self._sum, self._comp
        return other

    def __eq__(self, other) -> bool:
        if not isinstance(other, Archive):
            return NotImplemented
        f = self.filled
        return (
            self.n_tasks == other.n_tasks
            and self.d_genome == other.d_genome
            and np.array_equal(f, other.filled)
            and np.array_equal(self.fitness[f], other.fitness[f])
            and np.array_equal(self.genomes[f], other.genomes[f])
        )


def archive_insert(archive: Archive, task_id: int, genome, fitness: float,
                   eval_count: int = 0) -> bool:
    """Compete ``genome`` for slot ``task_id``; strict improvement wins."""
    return archive.insert(task_id, genome, fitness, eval_count)


def archive_stats(archive: Archive) -> ArchiveStats:
    return archive.stats()


@dataclass
class RunConfig:
    n_tasks: int
    d_genome: int
    d_task: int
    eval_budget: int = 100_000
    batch_size: int = 64
    init_count: int = 100
    tournament_sizes: Sequence[int] = field(default_factory=lambda: list(DEFAULT_TOURNAMENT_SIZES))
    sigma1: float = 0.01
    sigma2: float = 0.2
    seed: int = 0
    method: str = "mtme"
    fixed_tournament: Optional[int] = None
    normalize_reward: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        self.tournament_sizes = capped_tournament_sizes(self.tournament_sizes, self.n_tasks)
        self.validate()

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if min(self.n_tasks, self.d_genome, self.d_task) < 1:
            raise ValueError("n_tasks, d_genome and d_task must be >= 1")
        if self.batch_size < 1 or self.init_count < 1:
            raise ValueError("batch_size and init_count must be >= 1")
        if self.eval_budget < self.init_count:
            raise ValueError("eval_budget must be >= init_count")
        s = list(self.tournament_sizes)
        if not s or any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("tournament sizes must be non-empty and strictly increasing")
        if s[0] < 1 or s[-1] > self.n_tasks:
            raise ValueError("tournament sizes must lie in [1, n_tasks]")
        if self.fixed_tournament is not None and not 1 <= self.fixed_tournament <= self.n_tasks:
            raise ValueError("fixed_tournament must lie in [1, n_tasks]")
        for name in ("sigma1", "sigma2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")


def capped_tournament_sizes(sizes: Sequence[int], n_tasks: int) -> list[int]:
    """Clamp sizes to ``n_tasks`` and drop the duplicates this creates."""
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"tournament sizes must be strictly increasing, got {sizes}")
    out: list[int] = []
    for s in sizes:
        s = min(int(s), n_tasks)
        if not out or s > out[-1]:
            out.append(s)
    return out


# -- CSV ---------------------------------------------------------------------

def archive_header(d_task: int, d_genome: int) -> list[str]:
    return (["task_id"] + [f"task_{k}" for k in range(d_task)] + ["fitness"]
            + [f"x_{k}" for k in range(d_genome)])


def write_archive_csv(archive: Archive, task_params: np.ndarray, path) -> None:
    """One row per filled slot: task_id, task params, fitness, genome."""
    task_params = np.asarray(task_params, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(archive_header(task_params.shape[1], archive.d_genome))
        for i in archive.filled_ids():
            w.writerow([int(i)] + [fmt_float(v) for v in task_params[i]]
                       + [fmt_float(archive.fitness[i])]
                       + [fmt_float(v) for v in archive.genomes[i]])


def read_archive_csv(path, n_tasks: int) -> tuple[Archive, dict[int, np.ndarray]]:
    """Inverse of :func:`write_archive_csv`; also returns task params per row."""
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        d_task = sum(h.startswith("task_") and h != "task_id" for h in header)
        d_genome = sum(h.startswith("x_") for h in header)
        archive = Archive(n_tasks, d_genome)
        params = {}
        for row in r:
            tid = int(row[0])
            params[tid] = np.array([float(v) for v in row[1:1 + d_task]])
            fit = float(row[1 + d_task])
            genome = np.array([float(v) for v in row[2 + d_task:]])
            archive.insert(tid, genome, fit)
    return archive, params


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
