"""Multi-task MAP-Elites and the comparison methods.

Every method spends the same evaluation budget and fills the same kind of
archive, so their logs are directly comparable.  Randomness comes from
per-batch streams derived from ``(seed, batch index)``; candidate
generation happens on the coordinator and only the (pure) domain
evaluation is farmed out to worker threads, so results do not depend on
``n_jobs``.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import Archive, RunConfig, fmt_float
from .scheduler import BanditState, bandit_update, count_batch_successes, ucb1_select, \
    tournament_select_batch
from .tasks import TaskSet
from .variation import VariationParams, iso_line_batch, select_parent_ids

log = logging.getLogger(__name__)

LOG_COLUMNS = ("generation", "evals", "coverage", "mean_fitness", "max_fitness",
               "tournament_size", "batch_successes")

_ES_STREAM = 0x45535f  # tag separating per-task ES streams from batch streams


@dataclass
class LogRecord:
    generation: int
    evals: int
    coverage: float
    mean_fitness: Optional[float]
    max_fitness: Optional[float]
    tournament_size: Optional[int]
    batch_successes: int

    def row(self) -> list[str]:
        def f(v):
            return "" if v is None else fmt_float(v)
        return [str(self.generation), str(self.evals), fmt_float(self.coverage),
                f(self.mean_fitness), f(self.max_fitness),
                "" if self.tournament_size is None else str(self.tournament_size),
                str(self.batch_successes)]


@dataclass
class RunLog:
    method: str
    records: list[LogRecord] = field(default_factory=list)
    archive: Optional[Archive] = None
    wall_time: float = 0.0
    n_evals: int = 0
    n_invalid: int = 0
    n_variations: int = 0
    bandit: Optional[BanditState] = None
    selected_tasks: Optional[np.ndarray] = None  # task id per evaluation, when tracked

    @property
    def invalid_fraction(self) -> float:
        return self.n_invalid / self.n_evals if self.n_evals else 0.0

    def column(self, name: str) -> np.ndarray:
        vals = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else v for v in vals], dtype=float)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(LOG_COLUMNS)
            for r in self.records:
                w.writerow(r.row())


def read_log_csv(path) -> list[LogRecord]:
    def opt(v, cast):
        return None if v == "" else cast(v)
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        next(r)
        return [LogRecord(int(g), int(e), float(c), opt(m, float), opt(x, float),
                          opt(s, int), int(b)) for g, e, c, m, x, s, b in r]


class _Run:
    """Shared bookkeeping: budget, evaluation, archive updates and logging."""

    def __init__(self, config: RunConfig, task_set: TaskSet, domain: Callable,
                 log_path=None, track_tasks: bool = False):
        if len(task_set) != config.n_tasks or task_set.d_task != config.d_task:
            raise ValueError("task set does not match n_tasks/d_task of the config")
        self.config = config
        self.tasks = task_set
        self.domain = domain
        self.archive = Archive(config.n_tasks, config.d_genome)
        self.runlog = RunLog(config.method, archive=self.archive)
        self.evals = 0
        self.seed = config.seed % (1 << 64)
        self._pool = ThreadPoolExecutor(config.n_jobs) if config.n_jobs > 1 else None
        self._fh = None
        self._writer = None
        self._tracked: list[np.ndarray] | None = [] if track_tasks else None
        if log_path is not None:
            self._fh = open(log_path, "w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._fh)
            self._writer.writerow(LOG_COLUMNS)
            self._fh.flush()

    @property
    def remaining(self) -> int:
        return self.config.eval_budget - self.evals

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    def evaluate(self, genomes: np.ndarray, task_ids: np.ndarray) -> np.ndarray:
        params = self.tasks.params[task_ids]
        m = len(genomes)
        if self._pool is None or m < 2 * self.config.n_jobs:
            fit = np.asarray(self.domain(genomes, params), dtype=float)
        else:
            chunks = np.array_split(np.arange(m), self.config.n_jobs)
            parts = self._pool.map(lambda ix: self.domain(genomes[ix], params[ix]), chunks)
            fit = np.concatenate([np.asarray(p, dtype=float) for p in parts])
        if fit.shape != (m,):
            raise ValueError(f"domain returned shape {fit.shape}, expected ({m},)")
        self.evals += m
        if self._tracked is not None:
            self._tracked.append(np.asarray(task_ids).copy())
        return fit

    def insert_all(self, task_ids, genomes, fitness, first_eval: int) -> list[bool]:
        """Sequential archive competition; non-finite fitness is discarded."""
        results = []
        bad = 0
        for k, (t, g, f) in enumerate(zip(task_ids, genomes, fitness)):
            if not math.isfinite(f):
                bad += 1
                results.append(False)
                continue
            results.append(self.archive.insert(int(t), g, f, first_eval + k + 1))
        if bad:
            self.runlog.n_invalid += bad
            log.warning("%d non-finite fitness values discarded (evals %d-%d)",
                        bad, first_eval + 1, first_eval + len(results))
        return results

    def record(self, generation: int, s: Optional[int], successes: int) -> None:
        st = self.archive.stats()
        rec = LogRecord(generation, self.evals, st.coverage, st.mean_fitness,
                        st.max_fitness, s, successes)
        self.runlog.records.append(rec)
        if self._writer is not None:
            self._writer.writerow(rec.row())
            self._fh.flush()

    def finish(self, t0: float):
        if self._fh is not None:
            self._fh.close()
        if self._pool is not None:
            self._pool.shutdown()
        self.runlog.n_evals = self.evals
        self.runlog.wall_time = time.perf_counter() - t0
        if self._tracked is not None:
            self.runlog.selected_tasks = (np.concatenate(self._tracked) if self._tracked
                                          else np.zeros(0, dtype=np.int64))
        if self.runlog.invalid_fraction > 0.01:
            log.warning("%.2f%% of evaluations returned non-finite fitness",
                        100 * self.runlog.invalid_fraction)
        return self.archive, self.runlog


def _random_init(run: _Run, rng: np.random.Generator) -> None:
    """K random genomes, each evaluated on one uniformly random task."""
    cfg = run.config
    k = min(cfg.init_count, cfg.eval_budget)
    genomes = rng.random((k, cfg.d_genome))
    task_ids = rng.integers(cfg.n_tasks, size=k)
    start = run.evals
    fit = run.evaluate(genomes, task_ids)
    ok = run.insert_all(task_ids, genomes, fit, start)
    run.record(0, None, count_batch_successes(ok))


def _map_elites(config: RunConfig, task_set: TaskSet, domain, log_path=None,
                track_tasks: bool = False):
    t0 = time.perf_counter()
    run = _Run(config, task_set, domain, log_path, track_tasks)
    params = VariationParams(config.sigma1, config.sigma2)
    init_rng = run.rng(0)
    _random_init(run, init_rng)

    sizes = list(config.tournament_sizes)
    bandit = None
    if config.fixed_tournament is None:
        bandit = BanditState(sizes, config.batch_size, config.normalize_reward)
        arm = int(init_rng.integers(len(sizes)))
        run.runlog.bandit = bandit

    g = 0
    while run.remaining > 0 and run.archive.filled_count > 0:
        g += 1
        s = config.fixed_tournament if bandit is None else sizes[arm]
        b = min(config.batch_size, run.remaining)
        rng = run.rng(g)
        p1, p2 = select_parent_ids(run.archive, rng, b)
        children = iso_line_batch(run.archive.genomes[p1], run.archive.genomes[p2], params, rng)
        run.runlog.n_variations += b
        task_ids = tournament_select_batch(p1, task_set, s, rng)
        start = run.evals
        fit = run.evaluate(children, task_ids)
        successes = count_batch_successes(run.insert_all(task_ids, children, fit, start))
        if bandit is not None:
            bandit_update(bandit, arm, successes, config.batch_size)
            arm = ucb1_select(bandit)
        run.record(g, s, successes)
    return run.finish(t0)


def run_mtme(config: RunConfig, task_set: TaskSet, domain, log_path=None,
             track_tasks: bool = False):
    """Multi-task MAP-Elites: tournament task choice, UCB1-tuned tournament size.

    With ``config.fixed_tournament`` set the bandit is disabled and that
    size is used for every batch.
    """
    return _map_elites(config, task_set, domain, log_path, track_tasks)


def run_me_random_task(config: RunConfig, task_set: TaskSet, domain, log_path=None,
                       track_tasks: bool = False):
    """MAP-Elites where each offspring competes for one uniformly random task."""
    return _map_elites(replace(config, fixed_tournament=1), task_set, domain,
                       log_path, track_tasks)


def run_me_all_tasks(config: RunConfig, task_set: TaskSet, domain, log_path=None,
                     track_tasks: bool = False):
    """MAP-Elites where every offspring is evaluated on, and competes in, every task.

    A batch costs ``batch_size * n_tasks`` evaluations and only whole batches
    are run; the first batch is made of random genomes.
    """
    t0 = time.perf_counter()
    run = _Run(config, task_set, domain, log_path, track_tasks)
    n, b = config.n_tasks, config.batch_size
    if config.eval_budget < b * n:
        raise ValueError(f"budget {config.eval_budget} is below one batch ({b} x {n} tasks)")
    params = VariationParams(config.sigma1, config.sigma2)
    all_ids = np.arange(n)
    g = 0
    while run.remaining >= b * n:
        rng = run.rng(g)
        if g == 0:
            children = rng.random((b, config.d_genome))
        else:
            p1, p2 = select_parent_ids(run.archive, rng, b)
            children = iso_line_batch(run.archive.genomes[p1], run.archive.genomes[p2],
                                      params, rng)
            run.runlog.n_variations += b
        start = run.evals
        fit = run.evaluate(np.repeat(children, n, axis=0), np.tile(all_ids, b)).reshape(b, n)
        successes = 0
        for c in range(b):
            row = fit[c]
            better = np.flatnonzero(~np.isfinite(row) | (row > run.archive.fitness))
            ok = run.insert_all(better, np.broadcast_to(children[c], (len(better), config.d_genome)),
                                row[better], start + c * n)
            successes += count_batch_successes(ok)
        run.record(g, None, successes)
        g += 1
    return run.finish(t0)


def run_random_sampling(config: RunConfig, task_set: TaskSet, domain, log_path=None,
                        track_tasks: bool = False):
    """Uniform random genomes on uniform random tasks, no variation at all."""
    t0 = time.perf_counter()
    run = _Run(config, task_set, domain, log_path, track_tasks)
    g = 0
    while run.remaining > 0:
        rng = run.rng(g)
        b = min(config.batch_size, run.remaining)
        genomes = rng.random((b, config.d_genome))
        task_ids = rng.integers(config.n_tasks, size=b)
        start = run.evals
        fit = run.evaluate(genomes, task_ids)
        run.record(g, None, count_batch_successes(run.insert_all(task_ids, genomes, fit, start)))
        g += 1
    return run.finish(t0)


ES_INITIAL_STEP = 0.3
ES_STEP_FACTOR = 1.5


def es_stream(seed: int, task_id: int) -> np.random.Generator:
    return np.random.default_rng([seed % (1 << 64), _ES_STREAM, task_id])


def run_es_per_task(config: RunConfig, task_set: TaskSet, domain, log_path=None,
                    track_tasks: bool = False):
    """One independent (1+1)-ES per task with the 1/5th success rule.

    Tasks are served round-robin, one evaluation each per round, so the
    evaluation counter is shared fairly and the log is comparable with the
    other methods.  Each task draws from its own random stream.
    """
    t0 = time.perf_counter()
    run = _Run(config, task_set, domain, log_path, track_tasks)
    n, d = config.n_tasks, config.d_genome
    streams = [es_stream(config.seed, t) for t in range(n)]
    parent = np.zeros((n, d))
    parent_fit = np.full(n, -np.inf)
    step = np.full(n, ES_INITIAL_STEP)
    shrink = ES_STEP_FACTOR ** -0.25
    g = 0
    while run.remaining > 0:
        active = np.arange(min(n, run.remaining))
        if g == 0:
            cand = np.stack([streams[t].random(d) for t in active])
        else:
            noise = np.stack([streams[t].standard_normal(d) for t in active])
            cand = np.clip(parent[active] + step[active, None] * noise, 0.0, 1.0)
        start = run.evals
        fit = run.evaluate(cand, active)
        ok = run.insert_all(active, cand, fit, start)
        fin = np.isfinite(fit)
        if g > 0:
            improved = fin & (fit > parent_fit[active])
            step[active] *= np.where(improved, ES_STEP_FACTOR, shrink)
        accept = fin & (fit >= parent_fit[active])
        parent[active[accept]] = cand[accept]
        parent_fit[active[accept]] = fit[accept]
        run.record(g, None, count_batch_successes(ok))
        g += 1
    return run.finish(t0)


RUNNERS = {
    "mtme": run_mtme,
    "me_random_task": run_me_random_task,
    "me_all_tasks": run_me_all_tasks,
    "random_sampling": run_random_sampling,
    "es_per_task": run_es_per_task,
}


def run(config: RunConfig, task_set: TaskSet, domain, log_path=None, track_tasks: bool = False):
    """Dispatch on ``config.method``."""
    return RUNNERS[config.method](config, task_set, domain, log_path, track_tasks)
