"""Parent selection and the iso+line variation operator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Archive


@dataclass(frozen=True)
class VariationParams:
    sigma1: float = 0.01  # isotropic
    sigma2: float = 0.2   # along the parent-to-parent line

    def __post_init__(self):
        for v in (self.sigma1, self.sigma2):
            if not (math.isfinite(v) and v >= 0):
                raise ValueError("mutation strengths must be finite and non-negative")


class EmptyArchiveError(RuntimeError):
    pass


def select_parent_ids(archive: Archive, rng: np.random.Generator, size: int):
    """Two independent uniform draws of ``size`` filled slots each."""
    filled = archive.filled_ids()
    if filled.size == 0:
        raise EmptyArchiveError("cannot select parents from an empty archive")
    p1 = filled[rng.integers(filled.size, size=size)]
    p2 = filled[rng.integers(filled.size, size=size)]
    return p1, p2


def select_parents(archive: Archive, rng: np.random.Generator):
    """Return ``((task_id, elite), (task_id, elite))``; the two may coincide."""
    p1, p2 = select_parent_ids(archive, rng, 1)
    i, j = int(p1[0]), int(p2[0])
    return (i, archive[i]), (j, archive[j])


def iso_line_batch(x_i: np.ndarray, x_j: np.ndarray, params: VariationParams,
                   rng: np.random.Generator, clip: bool = True) -> np.ndarray:
    """Row-wise iso+line variation of (b, d) parent matrices.

    One isotropic Gaussian vector per child and one scalar Gaussian per child
    shared by every dimension of the line term.
    """
    b, d = x_i.shape
    iso = rng.standard_normal((b, d))
    line = rng.standard_normal((b, 1))
    child = x_i + params.sigma1 * iso + params.sigma2 * (x_j - x_i) * line
    if clip:
        np.clip(child, 0.0, 1.0, out=child)
    return child


def iso_line_variation(x_i, x_j, params: VariationParams, rng: np.random.Generator,
                       clip: bool = True) -> np.ndarray:
    x_i = np.asarray(getattr(x_i, "genome", x_i), dtype=float)
    x_j = np.asarray(getattr(x_j, "genome", x_j), dtype=float)
    if x_i.shape != x_j.shape:
        raise ValueError(f"genome dimension mismatch: {x_i.shape} vs {x_j.shape}")
    return iso_line_batch(x_i[None, :], x_j[None, :], params, rng, clip)[0]

