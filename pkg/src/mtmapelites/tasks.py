"""Task sets: CVT or uniform placement in the unit hypercube, and task distance."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .core import TaskDescriptor, fmt_float


@dataclass
class TaskSet:
    params: np.ndarray  # (n, d_task)
    generation_mode: str = "external"

    def __post_init__(self):
        self.params = np.ascontiguousarray(self.params, dtype=float)
        if self.params.ndim != 2 or len(self.params) == 0:
            raise ValueError("task params must be a non-empty 2-D array")
        if np.any(self.params < 0) or np.any(self.params > 1):
            raise ValueError("task params must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.params)

    @property
    def d_task(self) -> int:
        return self.params.shape[1]

    def __getitem__(self, i: int) -> TaskDescriptor:
        return TaskDescriptor(int(i), self.params[i])

    @property
    def descriptors(self) -> list[TaskDescriptor]:
        return [self[i] for i in range(len(self))]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TaskSet):
            return NotImplemented
        return np.array_equal(self.params, other.params)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["task_id"] + [f"task_{k}" for k in range(self.d_task)])
            for i, row in enumerate(self.params):
                w.writerow([i] + [fmt_float(v) for v in row])

    @classmethod
    def from_csv(cls, path) -> "TaskSet":
        with open(path, newline="", encoding="utf-8") as fh:
            r = csv.reader(fh)
            next(r)
            rows = [(int(row[0]), [float(v) for v in row[1:]]) for row in r if row]
        ids = [i for i, _ in rows]
        if sorted(ids) != list(range(len(ids))):
            raise ValueError(f"{path}: task ids must be dense in [0, n)")
        params = np.empty((len(rows), len(rows[0][1])))
        for i, p in rows:
            params[i] = p
        return cls(params, "external")


def lloyd(samples: np.ndarray, centroids: np.ndarray, n_iterations: int,
          rng: np.random.Generator, tol: float = 1e-6):
    """Lloyd's k-means iterations on a fixed sample cloud.

    Returns the final centroids and the quantization energy (mean squared
    distance of the samples to their nearest centroid) measured at the
    start of each iteration and after the last one.
    """
    centroids = centroids.copy()
    k, d = centroids.shape
    energies = []
    for _ in range(n_iterations):
        dist, label = cKDTree(centroids).query(samples)
        energies.append(float(np.mean(dist ** 2)))
        counts = np.bincount(label, minlength=k)
        new = np.empty_like(centroids)
        for j in range(d):
            new[:, j] = np.bincount(label, weights=samples[:, j], minlength=k)
        empty = counts == 0
        new[~empty] /= counts[~empty, None]
        if empty.any():
            new[empty] = samples[rng.integers(len(samples), size=int(empty.sum()))]
        shift = np.max(np.linalg.norm(new - centroids, axis=1))
        centroids = new
        if shift < tol:
            break
    dist, _ = cKDTree(centroids).query(samples)
    energies.append(float(np.mean(dist ** 2)))
    return centroids, energies


def generate_cvt(n: int, d_task: int, n_samples: int | None = None,
                 n_iterations: int = 30, seed: int = 0) -> TaskSet:
    """``n`` evenly spread tasks: k-means centroids of uniform samples."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n_samples is None:
        n_samples = max(100_000, 20 * n)
    if n_samples < 10 * n:
        raise ValueError("n_samples must be >= 10 * n")
    rng = np.random.default_rng(seed)
    samples = rng.random((n_samples, d_task))
    init = samples[rng.choice(n_samples, size=n, replace=False)]
    centroids, _ = lloyd(samples, init, n_iterations, rng)
    return TaskSet(np.clip(centroids, 0.0, 1.0), "cvt")


def generate_uniform(n: int, d_task: int, seed: int = 0) -> TaskSet:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return TaskSet(rng.random((n, d_task)), "uniform_random")


def task_distance(a, b) -> float:
    """Euclidean distance between two task descriptors (or raw param vectors)."""
    a = np.asarray(getattr(a, "params", a), dtype=float)
    b = np.asarray(getattr(b, "params", b), dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def closest_task(candidate_ids: Sequence[int], reference, task_set: TaskSet) -> int:
    """Candidate closest to ``reference``; ties go to the lowest id."""
    ids = np.asarray(candidate_ids, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("candidate_ids must be non-empty")
    ref = np.asarray(getattr(reference, "params", reference), dtype=float)
    d = np.sqrt(np.sum((task_set.params[ids] - ref) ** 2, axis=1))
    best = d == d.min()
    return int(ids[best].min())


def closest_tasks_batch(candidates: np.ndarray, references: np.ndarray,
                        task_params: np.ndarray) -> np.ndarray:
    """Row-wise :func:`closest_task` for a (b, s) matrix of candidate ids."""
    diff = task_params[candidates] - references[:, None, :]
    d = np.sqrt(np.einsum("bsk,bsk->bs", diff, diff))
    best = d == d.min(axis=1, keepdims=True)
    return np.where(best, candidates, np.iinfo(np.int64).max).min(axis=1)
