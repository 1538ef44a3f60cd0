"""scikit-learn style front end.

``fit(X)`` takes the task descriptors (one row per task, values in [0, 1])
and searches one elite per task; ``predict(X)`` returns the elite genome of
the nearest fitted task for each query row; ``score(X)`` is the mean
fitness of those genomes on the query tasks.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .core import DEFAULT_TOURNAMENT_SIZES, METHODS, RunConfig
from .engine import run
from .tasks import TaskSet, closest_tasks_batch


def check_unit_interval(X, name: str = "X") -> np.ndarray:
    """2-D float array with every entry in [0, 1]."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if np.any(X < 0) or np.any(X > 1):
        raise ValueError(f"{name} must lie in the unit hypercube [0, 1]^d")
    return X


def resolve_seed(random_state) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().entropy % (1 << 63))
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    raise ValueError("random_state must be an int or None")


class MultiTaskMAPElites(BaseEstimator):
    """One elite per task, found by Multi-task MAP-Elites or a baseline.

    Parameters
    ----------
    domain : callable
        ``domain(genomes, task_params) -> fitness`` on row-aligned arrays.
        Must expose ``d_genome`` unless ``d_genome`` is given.
    method : str
        ``"mtme"`` (default) or one of the baselines ``"me_random_task"``,
        ``"me_all_tasks"``, ``"random_sampling"``, ``"es_per_task"``.
    n_evals : int
        Total number of fitness evaluations.
    fixed_tournament : int or None
        Use this tournament size throughout instead of the UCB1 bandit.
    random_state : int or None
        Seed of the run; ``None`` draws one.

    Attributes
    ----------
    archive_ : Archive
    log_ : RunLog
    tasks_ : TaskSet
    """

    def __init__(self, domain=None, method="mtme", n_evals=100_000, batch_size=64,
                 init_count=100, tournament_sizes=DEFAULT_TOURNAMENT_SIZES, sigma1=0.01,
                 sigma2=0.2, fixed_tournament=None, normalize_reward=True, d_genome=None,
                 n_jobs=1, random_state=0):
        self.domain = domain
        self.method = method
        self.n_evals = n_evals
        self.batch_size = batch_size
        self.init_count = init_count
        self.tournament_sizes = tournament_sizes
        self.sigma1 = sigma1
        self.sigma2 = sigma2
        self.fixed_tournament = fixed_tournament
        self.normalize_reward = normalize_reward
        self.d_genome = d_genome
        self.n_jobs = n_jobs
        self.random_state = random_state

    def _run_config(self, n_tasks: int, d_task: int) -> RunConfig:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        d_genome = self.d_genome or getattr(self.domain, "d_genome", None)
        if d_genome is None:
            raise ValueError("d_genome is required when the domain does not define it")
        return RunConfig(
            n_tasks=n_tasks, d_genome=int(d_genome), d_task=d_task,
            eval_budget=int(self.n_evals), batch_size=int(self.batch_size),
            init_count=int(self.init_count), tournament_sizes=list(self.tournament_sizes),
            sigma1=float(self.sigma1), sigma2=float(self.sigma2),
            seed=resolve_seed(self.random_state), method=self.method,
            fixed_tournament=self.fixed_tournament, normalize_reward=self.normalize_reward,
            n_jobs=int(self.n_jobs))

    def fit(self, X, y=None, log_path=None):
        if not callable(self.domain):
            raise ValueError("domain must be a callable fitness function")
        X = check_unit_interval(X)
        config = self._run_config(*X.shape)
        self.tasks_ = TaskSet(X, "external")
        self.archive_, self.log_ = run(config, self.tasks_, self.domain, log_path=log_path)
        self.config_ = config
        self.n_features_in_ = X.shape[1]
        return self

    def nearest_task(self, X) -> np.ndarray:
        check_is_fitted(self, "archive_")
        X = check_unit_interval(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        cands = np.broadcast_to(np.arange(len(self.tasks_)), (len(X), len(self.tasks_)))
        return closest_tasks_batch(cands, X, self.tasks_.params)

    def predict(self, X) -> np.ndarray:
        """Elite genome of the nearest fitted task (NaN rows for empty niches)."""
        ids = self.nearest_task(X)
        out = self.archive_.genomes[ids].copy()
        out[~self.archive_.filled[ids]] = np.nan
        return out

    def score(self, X, y=None) -> float:
        X = check_unit_interval(X)
        genomes = self.predict(X)
        ok = ~np.isnan(genomes).any(axis=1)
        if not ok.any():
            return float("nan")
        return float(np.mean(self.domain(genomes[ok], X[ok])))

    @property
    def elite_fitness_(self) -> np.ndarray:
        check_is_fitted(self, "archive_")
        f = self.archive_.fitness.copy()
        f[~self.archive_.filled] = np.nan
        return f
