"""Fitness domains: the variable-morphology planar arm and a synthetic family.

A domain is a callable ``domain(genomes, task_params) -> fitness`` taking
row-aligned ``(m, d_genome)`` and ``(m, d_task)`` arrays.  Higher is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


# -- planar arm -----------------------------------------------------------------

@dataclass(frozen=True)
class ArmTask:
    L: float
    alpha_max: float

    def __post_init__(self):
        if not (0 <= self.L <= 1 and 0 <= self.alpha_max <= 1):
            raise ValueError("arm task parameters must lie in [0, 1]")


def arm_normalize(genome, task: ArmTask, d: int | None = None):
    """Map a unit-cube genome to joint angles (rad) and per-link length (m).

    Scaling by ``1/d`` keeps the total length and reach independent of the
    number of joints.
    """
    genome = np.asarray(genome, dtype=float)
    d = len(genome) if d is None else d
    if genome.shape != (d,):
        raise ValueError(f"genome of length {genome.shape} for a {d}-joint arm")
    angles = (genome - 0.5) * task.alpha_max * 2 * math.pi / d
    return angles, task.L / d


def link_transform(angle: float, link_len: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0, link_len],
                     [s, c, 0.0, 0.0],
                     [0.0, 0.0, 1.0, 0.0],
                     [0.0, 0.0, 0.0, 1.0]])


def arm_forward_kinematics_matrix(angles, link_len: float) -> np.ndarray:
    """Tip position by chaining 4x4 homogeneous link transforms."""
    m = np.eye(4)
    for a in angles:
        m = m @ link_transform(a, link_len)
    return (m @ np.array([0.0, 0.0, 0.0, 1.0]))[:2]


def arm_forward_kinematics(angles, link_len: float) -> np.ndarray:
    """Tip position of the chain, planar specialization of the 4x4 product.

    Each link transform translates along the current x-axis before rotating,
    so link ``i`` points along the sum of the joint angles *before* it; the
    first link lies on the base x-axis and the last angle does not move the tip.
    """
    angles = np.asarray(angles, dtype=float)
    return _tips(angles[None, :], np.array([link_len]))[0]


def _tips(angles: np.ndarray, link_len: np.ndarray) -> np.ndarray:
    heading = np.cumsum(angles, axis=1)
    heading[:, 1:] = heading[:, :-1].copy()
    heading[:, 0] = 0.0
    x = link_len * np.cos(heading).sum(axis=1)
    y = link_len * np.sin(heading).sum(axis=1)
    return np.stack([x, y], axis=1)


@dataclass(frozen=True)
class ArmDomainConfig:
    d: int = 10
    target: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("arm needs at least one joint")


def arm_fitness(genome, task: ArmTask, cfg: ArmDomainConfig = ArmDomainConfig()) -> float:
    angles, link_len = arm_normalize(genome, task, cfg.d)
    tip = arm_forward_kinematics(angles, link_len)
    return -float(np.linalg.norm(tip - np.asarray(cfg.target, dtype=float)))


class ArmDomain:
    """Batch arm fitness; task params are ``(L, alpha_max)``."""

    d_task = 2
    name = "arm"

    def __init__(self, d: int = 10, target=(1.0, 1.0)):
        self.config = ArmDomainConfig(int(d), tuple(float(t) for t in target))

    @property
    def d_genome(self) -> int:
        return self.config.d

    def __call__(self, genomes, task_params) -> np.ndarray:
        genomes = np.atleast_2d(np.asarray(genomes, dtype=float))
        task_params = np.atleast_2d(np.asarray(task_params, dtype=float))
        d = self.config.d
        if genomes.shape[1] != d or task_params.shape[1] != 2:
            raise ValueError("arm domain expects (m, d) genomes and (m, 2) tasks")
        L, amax = task_params[:, 0], task_params[:, 1]
        angles = (genomes - 0.5) * (amax * 2 * math.pi / d)[:, None]
        tips = _tips(angles, L / d)
        return -np.hypot(tips[:, 0] - self.config.target[0], tips[:, 1] - self.config.target[1])

    def __repr__(self) -> str:
        return f"ArmDomain(d={self.config.d}, target={self.config.target})"


# -- synthetic multi-task family -----------------------------------------------

RUGGED_AMPLITUDE = 0.9
RUGGED_FREQUENCY = 6 * math.pi
# std of each weight times sqrt(d_task); small enough that neighbouring tasks
# share a basin of the rugged term, large enough that distant ones do not
WEIGHT_SCALE = 0.1


@dataclass
class SyntheticDomain:
    """Rastrigin-like landscape whose optimum moves smoothly with the task.

    ``optimum(tau)_i = 0.5 + 0.3 sin(2 pi <w_i, tau> + phi_i)`` where the
    weights ``w ~ N(0, WEIGHT_SCALE**2 / d_task)`` and phases
    ``phi ~ U(0, 2 pi)`` come from ``constants_seed``.
    """

    d_genome: int = 36
    d_task: int = 12
    constants_seed: int = 20201
    weights: np.ndarray = field(init=False, repr=False)
    phases: np.ndarray = field(init=False, repr=False)
    name = "synthetic"

    def __post_init__(self):
        rng = np.random.default_rng(self.constants_seed)
        self.weights = rng.standard_normal((self.d_genome, self.d_task)) * (
            WEIGHT_SCALE / math.sqrt(self.d_task))
        self.phases = rng.uniform(0, 2 * math.pi, self.d_genome)

    def optimum(self, task_params) -> np.ndarray:
        t = np.asarray(task_params, dtype=float)
        return 0.5 + 0.3 * np.sin(2 * math.pi * (t @ self.weights.T) + self.phases)

    def lipschitz_bound(self) -> float:
        """Bound on ||optimum(a) - optimum(b)|| / ||a - b||."""
        return 0.3 * 2 * math.pi * float(np.linalg.norm(self.weights, 2))

    def __call__(self, genomes, task_params) -> np.ndarray:
        genomes = np.atleast_2d(np.asarray(genomes, dtype=float))
        task_params = np.atleast_2d(np.asarray(task_params, dtype=float))
        if genomes.shape[1] != self.d_genome or task_params.shape[1] != self.d_task:
            raise ValueError(
                f"synthetic domain expects ({self.d_genome},) genomes and ({self.d_task},) tasks")
        t = genomes - self.optimum(task_params)
        terms = t * t - RUGGED_AMPLITUDE * np.cos(RUGGED_FREQUENCY * t) + RUGGED_AMPLITUDE
        return -terms.mean(axis=1)


def synthetic_fitness(genome, task, domain: SyntheticDomain | None = None) -> float:
    domain = domain or SyntheticDomain(len(genome), len(getattr(task, "params", task)))
    return float(domain(genome, getattr(task, "params", task))[0])


def make_domain(name: str, d_genome: int | None = None, d_task: int | None = None,
                target=(1.0, 1.0), constants_seed: int = 20201):
    if name == "arm":
        return ArmDomain(d_genome or 10, target)
    if name == "synthetic":
        return SyntheticDomain(d_genome or 36, d_task or 12, constants_seed)
    raise ValueError(f"unknown domain {name!r}")
