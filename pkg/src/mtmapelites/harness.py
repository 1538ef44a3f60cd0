"""Experiment orchestration: config files, replicates and the aggregate table.

An experiment config is an INI file::

    [experiment]
    methods = mtme, me_random_task, mtme@10   ; "@S" pins the tournament size
    replicates = 10
    seed_base = 0
    output_dir = results/arm
    workers = 4

    [domain]
    name = arm            ; or synthetic
    dim = 10
    target = 1.0, 1.0     ; arm only
    task_dim = 12         ; synthetic only
    constants_seed = 20201

    [tasks]
    n = 500
    mode = cvt            ; cvt | uniform | file
    seed = 0
    file =                ; CSV with task_id, task_0.. when mode = file

    [run]
    evals = 200000
    batch = 64
    init = 100
    tournament_sizes = 1, 5, 10, 50, 100, 500, 1000
    sigma1 = 0.01
    sigma2 = 0.2
    normalize_reward = true
    jobs = 1
"""

from __future__ import annotations

import configparser
import csv
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .core import DEFAULT_TOURNAMENT_SIZES, METHODS, RunConfig, ensure_dir, fmt_float, \
    write_archive_csv
from .domains import make_domain
from .engine import run
from .stats import mann_whitney_u, summarize
from .tasks import TaskSet, generate_cvt, generate_uniform

log = logging.getLogger(__name__)

AGGREGATE_COLUMNS = ("method", "replicate", "seed", "status", "evals", "coverage",
                     "final_mean_fitness", "final_max_fitness")


def parse_method(label: str) -> tuple[str, Optional[int]]:
    """``"mtme@10"`` -> ``("mtme", 10)``; plain names have no pinned size."""
    name, _, size = label.strip().partition("@")
    if name not in METHODS:
        raise ValueError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}")
    if size and name != "mtme":
        raise ValueError(f"only mtme takes a fixed tournament size, got {label!r}")
    return name, (int(size) if size else None)


@dataclass
class DomainSpec:
    name: str = "arm"
    dim: int = 10
    task_dim: int = 2
    target: tuple = (1.0, 1.0)
    constants_seed: int = 20201

    def build(self):
        return make_domain(self.name, self.dim, self.task_dim, self.target, self.constants_seed)


@dataclass
class TaskSpec:
    n: int = 500
    mode: str = "cvt"
    seed: int = 0
    file: Optional[str] = None

    def build(self, d_task: int) -> TaskSet:
        if self.mode == "cvt":
            return generate_cvt(self.n, d_task, seed=self.seed)
        if self.mode == "uniform":
            return generate_uniform(self.n, d_task, seed=self.seed)
        if self.mode == "file":
            return TaskSet.from_csv(self.file)
        raise ValueError(f"unknown task mode {self.mode!r}")


@dataclass
class ExperimentSpec:
    methods: list[str]
    n_replicates: int = 1
    seed_base: int = 0
    output_dir: str = "results"
    domain: DomainSpec = field(default_factory=DomainSpec)
    tasks: TaskSpec = field(default_factory=TaskSpec)
    eval_budget: int = 100_000
    batch_size: int = 64
    init_count: int = 100
    tournament_sizes: tuple = DEFAULT_TOURNAMENT_SIZES
    sigma1: float = 0.01
    sigma2: float = 0.2
    normalize_reward: bool = True
    n_jobs: int = 1
    workers: int = 1

    def __post_init__(self):
        if not self.methods:
            raise ValueError("method list is empty")
        for m in self.methods:
            parse_method(m)
        if self.n_replicates < 1:
            raise ValueError("n_replicates must be >= 1")
        if self.domain.name == "arm":
            self.domain.task_dim = 2

    def run_config(self, method: str, replicate: int, n_tasks: int) -> RunConfig:
        name, fixed = parse_method(method)
        return RunConfig(
            n_tasks=n_tasks, d_genome=self.domain.dim, d_task=self.domain.task_dim,
            eval_budget=self.eval_budget, batch_size=self.batch_size,
            init_count=self.init_count, tournament_sizes=list(self.tournament_sizes),
            sigma1=self.sigma1, sigma2=self.sigma2, seed=self.seed_base + replicate,
            method=name, fixed_tournament=fixed, normalize_reward=self.normalize_reward,
            n_jobs=self.n_jobs)


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(",", " ").split())


def load_spec(path) -> ExperimentSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not cp.read(path, encoding="utf-8"):
        raise FileNotFoundError(path)
    ex, dom, tk, rn = (cp[s] if cp.has_section(s) else {} for s in
                       ("experiment", "domain", "tasks", "run"))
    methods = [m.strip() for m in ex.get("methods", "").split(",") if m.strip()]
    domain = DomainSpec(
        name=dom.get("name", "arm"), dim=int(dom.get("dim", 10)),
        task_dim=int(dom.get("task_dim", 12)),
        target=tuple(float(t) for t in dom.get("target", "1.0, 1.0").split(",")),
        constants_seed=int(dom.get("constants_seed", 20201)))
    tasks = TaskSpec(n=int(tk.get("n", 500)), mode=tk.get("mode", "cvt"),
                     seed=int(tk.get("seed", 0)), file=tk.get("file") or None)
    if tasks.file and not Path(tasks.file).is_absolute():
        tasks.file = str(Path(path).parent / tasks.file)
    return ExperimentSpec(
        methods=methods, n_replicates=int(ex.get("replicates", 1)),
        seed_base=int(ex.get("seed_base", 0)), output_dir=ex.get("output_dir", "results"),
        workers=int(ex.get("workers", 1)), domain=domain, tasks=tasks,
        eval_budget=int(rn.get("evals", 100_000)), batch_size=int(rn.get("batch", 64)),
        init_count=int(rn.get("init", 100)),
        tournament_sizes=_ints(rn.get("tournament_sizes", "1 5 10 50 100 500 1000")),
        sigma1=float(rn.get("sigma1", 0.01)), sigma2=float(rn.get("sigma2", 0.2)),
        normalize_reward=str(rn.get("normalize_reward", "true")).lower() in ("1", "true", "yes"),
        n_jobs=int(rn.get("jobs", 1)))


def run_dir(root, method: str, replicate: int) -> Path:
    return Path(root) / method.replace("@", "_s") / f"rep_{replicate:03d}"


def run_single(config: RunConfig, task_set: TaskSet, domain, out_dir) -> dict:
    """One run with its log and final archive written under ``out_dir``."""
    out = ensure_dir(out_dir)
    archive, runlog = run(config, task_set, domain, log_path=out / "log.csv")
    write_archive_csv(archive, task_set.params, out / "archive.csv")
    st = archive.stats()
    return {"status": "ok" if runlog.invalid_fraction <= 0.01 else "domain_errors",
            "evals": runlog.n_evals, "coverage": st.coverage,
            "final_mean_fitness": st.mean_fitness, "final_max_fitness": st.max_fitness,
            "wall_time": runlog.wall_time}


def _job(args):
    spec, method, rep, task_set, root = args
    try:
        cfg = spec.run_config(method, rep, len(task_set))
        res = run_single(cfg, task_set, spec.domain.build(), run_dir(root, method, rep))
    except Exception:
        log.error("run %s/%d failed:\n%s", method, rep, traceback.format_exc())
        res = {"status": "failed"}
    res.update(method=method, replicate=rep, seed=spec.seed_base + rep)
    return res


def run_experiment(spec: ExperimentSpec, task_set: TaskSet | None = None) -> Path:
    """Run every (method, replicate) pair and write ``aggregate.csv``.

    Replicate ``r`` uses seed ``seed_base + r``.  Runs go to
    ``<output_dir>/<method>/rep_<r>/{log,archive}.csv``.
    """
    root = ensure_dir(spec.output_dir)
    if task_set is None:
        task_set = spec.tasks.build(spec.domain.task_dim)
    task_set.to_csv(root / "tasks.csv")
    jobs = [(spec, m, r, task_set, root) for m in spec.methods for r in range(spec.n_replicates)]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    write_aggregate(results, root / "aggregate.csv")
    return root


def write_aggregate(results: list[dict], path) -> None:
    def f(v):
        return "" if v is None else (fmt_float(v) if isinstance(v, float) else str(v))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(AGGREGATE_COLUMNS)
        for r in sorted(results, key=lambda r: (r["method"], r["replicate"])):
            w.writerow([f(r.get(c)) for c in AGGREGATE_COLUMNS])


def read_aggregate(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["replicate"] = int(r["replicate"])
        r["seed"] = int(r["seed"])
        for k in ("evals",):
            r[k] = int(r[k]) if r[k] else None
        for k in ("coverage", "final_mean_fitness", "final_max_fitness"):
            r[k] = float(r[k]) if r[k] else None
    return rows


def final_fitness_by_method(rows: list[dict]) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {}
    for r in rows:
        if r["status"] != "failed" and r["final_mean_fitness"] is not None:
            out.setdefault(r["method"], []).append(r["final_mean_fitness"])
    return out


def stats_report(rows: list[dict]) -> str:
    """Median/IQR per method and pairwise rank-sum tests, as CSV text."""
    by = final_fitness_by_method(rows)
    lines = ["method,n,median,q1,q3"]
    for m in sorted(by):
        s = summarize(by[m])
        lines.append(f"{m},{s.n},{fmt_float(s.median)},{fmt_float(s.q1)},{fmt_float(s.q3)}")
    lines.append("")
    lines.append("method_a,method_b,U,p_two_sided")
    names = sorted(by)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            res = mann_whitney_u(by[a], by[b])
            lines.append(f"{a},{b},{fmt_float(res.U)},{fmt_float(res.p_two_sided)}")
    missing = [f"{r['method']}/{r['replicate']}" for r in rows if r["status"] == "failed"]
    if missing:
        lines.append("")
        lines.append("missing," + " ".join(missing))
    return "\n".join(lines) + "\n"
