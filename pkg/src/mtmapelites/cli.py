"""Command line interface: ``mtme run|experiment|stats|export``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .core import METHODS, RunConfig, ensure_dir, read_archive_csv
from .domains import make_domain
from .export import cross_evaluate_top_elites, export_genome_plot, export_heatmap, \
    write_cross_evaluation
from .harness import load_spec, read_aggregate, run_experiment, run_single, stats_report
from .tasks import TaskSet, generate_cvt, generate_uniform


def _add_domain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", choices=("arm", "synthetic"), default="arm")
    p.add_argument("--dim", type=int, default=None,
                   help="genome dimension (arm joints; default 10 arm, 36 synthetic)")
    p.add_argument("--task-dim", type=int, default=12, help="synthetic task dimension")
    p.add_argument("--target", type=float, nargs=2, default=(1.0, 1.0), help="arm target")
    p.add_argument("--constants-seed", type=int, default=20201,
                   help="seed of the synthetic family's constants")


def _domain(args):
    dom = make_domain(args.domain, args.dim, args.task_dim, tuple(args.target),
                      args.constants_seed)
    return dom


def _tasks(args, d_task: int) -> TaskSet:
    if args.task_file:
        ts = TaskSet.from_csv(args.task_file)
        if ts.d_task != d_task:
            raise SystemExit(f"task file has {ts.d_task}-D tasks, domain needs {d_task}-D")
        return ts
    if args.task_mode == "cvt":
        return generate_cvt(args.tasks, d_task, seed=args.task_seed)
    return generate_uniform(args.tasks, d_task, seed=args.task_seed)


def cmd_run(args) -> int:
    domain = _domain(args)
    tasks = _tasks(args, domain.d_task)
    out = ensure_dir(args.out)
    tasks.to_csv(out / "tasks.csv")
    cfg = RunConfig(
        n_tasks=len(tasks), d_genome=domain.d_genome, d_task=domain.d_task,
        eval_budget=args.evals, batch_size=args.batch, init_count=args.init,
        tournament_sizes=args.tournament_sizes, sigma1=args.sigma1, sigma2=args.sigma2,
        seed=args.seed, method=args.method, fixed_tournament=args.fixed_tournament,
        normalize_reward=not args.raw_reward, n_jobs=args.jobs)
    res = run_single(cfg, tasks, domain, out)
    print(f"{args.method}: evals={res['evals']} coverage={res['coverage']:.4f} "
          f"mean_fitness={res['final_mean_fitness']} max_fitness={res['final_max_fitness']} "
          f"({res['wall_time']:.2f}s) -> {out}")
    return 0 if res["status"] == "ok" else 1


def cmd_experiment(args) -> int:
    spec = load_spec(args.config)
    if args.out:
        spec.output_dir = args.out
    if args.workers:
        spec.workers = args.workers
    root = run_experiment(spec)
    rows = read_aggregate(root / "aggregate.csv")
    print(stats_report(rows), end="")
    return 0 if all(r["status"] == "ok" for r in rows) else 1


def cmd_stats(args) -> int:
    report = stats_report(read_aggregate(args.aggregate))
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    print(report, end="")
    return 0


def cmd_export(args) -> int:
    run_dir = Path(args.run_dir)
    tasks = TaskSet.from_csv(args.tasks or run_dir / "tasks.csv")
    archive, _ = read_archive_csv(run_dir / "archive.csv", len(tasks))
    out = ensure_dir(args.out or run_dir)
    what = {"heatmap", "genome", "cross-eval"} if args.what == "all" else {args.what}
    written = []
    if "heatmap" in what:
        written += export_heatmap(archive, tasks, out / "heatmap")
    if "genome" in what:
        written.append(export_genome_plot(archive, out / "genomes.csv"))
    if "cross-eval" in what:
        if args.dim is None:
            args.dim = archive.d_genome
        if args.domain == "synthetic":
            args.task_dim = tasks.d_task
        rows = cross_evaluate_top_elites(archive, tasks, _domain(args), args.top_fraction)
        written.append(write_cross_evaluation(rows, out / "cross_eval.csv"))
    for p in written:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtme", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single run")
    _add_domain_flags(p)
    p.add_argument("--method", choices=METHODS, default="mtme")
    p.add_argument("--tasks", type=int, default=500, help="number of tasks")
    p.add_argument("--task-mode", choices=("cvt", "uniform"), default="cvt")
    p.add_argument("--task-seed", type=int, default=0)
    p.add_argument("--task-file", default=None, help="CSV of tasks (task_id, task_0, ...)")
    p.add_argument("--evals", type=int, default=100_000)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--init", type=int, default=100)
    p.add_argument("--tournament-sizes", type=int, nargs="+",
                   default=[1, 5, 10, 50, 100, 500, 1000])
    p.add_argument("--fixed-tournament", type=int, default=None)
    p.add_argument("--sigma1", type=float, default=0.01)
    p.add_argument("--sigma2", type=float, default=0.2)
    p.add_argument("--raw-reward", action="store_true",
                   help="UCB1 on raw success counts instead of per-evaluation rates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="evaluation threads per batch")
    p.add_argument("--out", default="run_out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="replicated comparison from a config file")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("stats", help="medians and rank-sum tests from aggregate.csv")
    p.add_argument("aggregate")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="heatmap / genome dump / top-elite cross-evaluation")
    _add_domain_flags(p)
    p.add_argument("run_dir")
    p.add_argument("--what", choices=("heatmap", "genome", "cross-eval", "all"), default="all")
    p.add_argument("--tasks", default=None, help="task CSV (default <run_dir>/tasks.csv)")
    p.add_argument("--top-fraction", type=float, default=0.05)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
