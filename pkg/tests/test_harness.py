import textwrap

import numpy as np
import pytest

from mtmapelites.cli import main
from mtmapelites.core import read_archive_csv
from mtmapelites.engine import read_log_csv
from mtmapelites.harness import DomainSpec, ExperimentSpec, TaskSpec, load_spec, parse_method, \
    read_aggregate, run_experiment, stats_report
from mtmapelites.tasks import TaskSet


def small_spec(out, **kw):
    base = dict(methods=["mtme", "random_sampling"], n_replicates=2, seed_base=10,
                output_dir=str(out), domain=DomainSpec("arm", 5),
                tasks=TaskSpec(n=40, mode="uniform", seed=1), eval_budget=2000, batch_size=32,
                init_count=50)
    base.update(kw)
    return ExperimentSpec(**base)


def test_experiment_layout(tmp_path):
    root = run_experiment(small_spec(tmp_path / "exp"))
    run_dirs = sorted(p.parent for p in root.glob("*/rep_*/log.csv"))
    assert len(run_dirs) == 4
    for d in run_dirs:
        assert (d / "archive.csv").exists()
    rows = read_aggregate(root / "aggregate.csv")
    assert [(r["method"], r["replicate"], r["seed"]) for r in rows] == [
        ("mtme", 0, 10), ("mtme", 1, 11), ("random_sampling", 0, 10), ("random_sampling", 1, 11)]
    assert all(r["status"] == "ok" and r["evals"] == 2000 for r in rows)
    # files round-trip to what was recorded
    log = read_log_csv(root / "mtme" / "rep_001" / "log.csv")
    archive, _ = read_archive_csv(root / "mtme" / "rep_001" / "archive.csv", 40)
    assert log[-1].mean_fitness == archive.stats().mean_fitness == rows[1]["final_mean_fitness"]


def test_experiment_deterministic_across_workers(tmp_path):
    a = run_experiment(small_spec(tmp_path / "a", workers=1))
    b = run_experiment(small_spec(tmp_path / "b", workers=4))
    assert (a / "aggregate.csv").read_bytes() == (b / "aggregate.csv").read_bytes()
    for rel in ("mtme/rep_000/archive.csv", "random_sampling/rep_001/log.csv"):
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        small_spec("x", methods=["mtme", "cmaes"])
    with pytest.raises(ValueError):
        parse_method("random_sampling@10")
    with pytest.raises(ValueError):
        small_spec("x", methods=[])
    assert parse_method("mtme@25") == ("mtme", 25)


def test_failed_run_marked_missing(tmp_path):
    spec = small_spec(tmp_path / "exp", methods=["mtme@100", "mtme"], n_replicates=1)
    root = run_experiment(spec)  # 100 > 40 tasks: the pinned run fails
    rows = read_aggregate(root / "aggregate.csv")
    status = {r["method"]: r["status"] for r in rows}
    assert status == {"mtme@100": "failed", "mtme": "ok"}
    assert "missing,mtme@100/0" in stats_report(rows)


CONFIG = """
[experiment]
methods = mtme, me_random_task, mtme@5
replicates = 2
seed_base = 3
output_dir = {out}

[domain]
name = arm
dim = 4

[tasks]
n = 30
mode = uniform
seed = 2

[run]
evals = 1500
batch = 16
init = 20
tournament_sizes = 1, 5, 10
"""


def test_config_file(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(CONFIG.format(out=tmp_path / "out"))
    spec = load_spec(path)
    assert spec.methods == ["mtme", "me_random_task", "mtme@5"]
    assert spec.tournament_sizes == (1, 5, 10)
    assert spec.domain.task_dim == 2
    cfg = spec.run_config("mtme@5", 1, 30)
    assert cfg.fixed_tournament == 5 and cfg.seed == 4 and cfg.eval_budget == 1500


def test_cli_experiment_and_stats(tmp_path, capsys):
    path = tmp_path / "exp.ini"
    path.write_text(CONFIG.format(out=tmp_path / "out"))
    assert main(["experiment", str(path)]) == 0
    out = capsys.readouterr().out
    assert "method,n,median,q1,q3" in out and "me_random_task,mtme,"
    assert main(["stats", str(tmp_path / "out" / "aggregate.csv"),
                 "--out", str(tmp_path / "s.csv")]) == 0
    text = (tmp_path / "s.csv").read_text()
    assert "method_a,method_b,U,p_two_sided" in text
    assert text.count("\n") == 1 + 3 + 1 + 1 + 3


def test_cli_run_and_export(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "--domain", "arm", "--method", "mtme", "--tasks", "50", "--dim", "6",
                 "--evals", "3000", "--batch", "32", "--seed", "7", "--out", str(out)])
    assert code == 0
    assert {"tasks.csv", "log.csv", "archive.csv"} <= {p.name for p in out.iterdir()}
    assert main(["export", str(out), "--domain", "arm", "--top-fraction", "0.1"]) == 0
    for name in ("heatmap.svg", "heatmap.csv", "genomes.csv", "cross_eval.csv"):
        assert (out / name).exists()


def test_cli_fixed_tournament_and_task_file(tmp_path):
    ts = TaskSet(np.random.default_rng(0).random((25, 2)))
    ts.to_csv(tmp_path / "tasks.csv")
    out = tmp_path / "run"
    assert main(["run", "--task-file", str(tmp_path / "tasks.csv"), "--dim", "4",
                 "--evals", "1000", "--fixed-tournament", "5", "--out", str(out)]) == 0
    log = read_log_csv(out / "log.csv")
    assert {r.tournament_size for r in log[1:]} == {5}
    assert TaskSet.from_csv(out / "tasks.csv") == ts


def test_cli_synthetic_run(tmp_path):
    out = tmp_path / "syn"
    assert main(["run", "--domain", "synthetic", "--tasks", "20", "--task-mode", "uniform",
                 "--evals", "800", "--method", "es_per_task", "--out", str(out)]) == 0
    archive, params = read_archive_csv(out / "archive.csv", 20)
    assert archive.d_genome == 36 and len(next(iter(params.values()))) == 12
    assert main(["export", str(out), "--domain", "synthetic", "--what", "cross-eval"]) == 0


def test_cli_nonzero_exit_on_domain_errors(tmp_path, monkeypatch):
    import mtmapelites.cli as cli
    from mtmapelites.domains import ArmDomain

    class Broken(ArmDomain):
        def __call__(self, g, t):
            f = super().__call__(g, t)
            f[::10] = np.nan
            return f

    monkeypatch.setattr(cli, "make_domain", lambda *a, **k: Broken(4))
    assert main(["run", "--tasks", "20", "--dim", "4", "--evals", "640",
                 "--out", str(tmp_path / "b")]) == 1


def test_cli_bad_input(tmp_path, capsys):
    assert main(["run", "--tasks", "5", "--fixed-tournament", "9", "--evals", "200",
                 "--out", str(tmp_path / "x")]) == 2
    assert "error" in capsys.readouterr().err


def test_config_written_docs_parse(tmp_path):
    from mtmapelites import harness
    doc = harness.__doc__.split("::", 1)[1]
    path = tmp_path / "doc.ini"
    path.write_text(textwrap.dedent(doc).replace("results/arm", str(tmp_path / "r")))
    spec = load_spec(path)
    assert spec.methods == ["mtme", "me_random_task", "mtme@10"]
    assert spec.eval_budget == 200_000 and spec.tasks.mode == "cvt"
