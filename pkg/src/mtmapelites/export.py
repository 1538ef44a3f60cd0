"""Plot-ready exports of an archive: task-space map, genome dump, cross-evaluation."""

from __future__ import annotations

import csv
import logging
import math
from pathlib import Path

import numpy as np

from .core import Archive, fmt_float
from .tasks import TaskSet

log = logging.getLogger(__name__)

EMPTY_COLOR = "#d9d9d9"
# viridis anchor colors, low to high fitness
_PALETTE = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=float)


def fitness_color(value: float, lo: float, hi: float) -> str:
    t = 0.5 if hi <= lo else (value - lo) / (hi - lo)
    t = min(max(t, 0.0), 1.0) * (len(_PALETTE) - 1)
    i = min(int(t), len(_PALETTE) - 2)
    rgb = _PALETTE[i] + (t - i) * (_PALETTE[i + 1] - _PALETTE[i])
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


def _clip_polygon(poly: list, lo: float = 0.0, hi: float = 1.0) -> list:
    """Sutherland-Hodgman clip of a convex polygon to the square [lo, hi]^2."""
    edges = [(0, lo, 1), (0, hi, -1), (1, lo, 1), (1, hi, -1)]
    for axis, bound, sign in edges:
        if not poly:
            break
        out = []
        for k in range(len(poly)):
            p, q = poly[k - 1], poly[k]
            pin = sign * (p[axis] - bound) >= 0
            qin = sign * (q[axis] - bound) >= 0
            if pin != qin:
                t = (bound - p[axis]) / (q[axis] - p[axis])
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
            if qin:
                out.append(q)
        poly = out
    return poly


def _voronoi_cells(points: np.ndarray) -> list:
    n = len(points)
    if n == 1:
        return [[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]]
    from scipy.spatial import Voronoi
    far = np.array([[-10, -10], [-10, 11], [11, -10], [11, 11]], dtype=float)
    vor = Voronoi(np.vstack([points, far]))
    cells = []
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        poly = [tuple(vor.vertices[v]) for v in region if v >= 0]
        cells.append(_clip_polygon(poly))
    return cells


def heatmap_svg(archive: Archive, task_set: TaskSet, size: int = 600) -> str:
    """Fitness-colored Voronoi map of a 2-D task space as a standalone SVG."""
    if task_set.d_task != 2:
        raise ValueError("heatmap needs a 2-D task space")
    fit = archive.fitness[archive.filled]
    lo, hi = (float(fit.min()), float(fit.max())) if fit.size else (0.0, 0.0)
    try:
        cells = _voronoi_cells(task_set.params)
    except Exception:  # degenerate layouts (e.g. collinear tasks) fall back to dots
        cells = None
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    r = max(1.0, 0.5 * size / math.sqrt(len(task_set)))
    for i, (x, y) in enumerate(task_set.params):
        color = fitness_color(archive.fitness[i], lo, hi) if archive.filled[i] else EMPTY_COLOR
        if cells is not None and len(cells[i]) >= 3:
            pts = " ".join(f"{px * size:.2f},{(1 - py) * size:.2f}" for px, py in cells[i])
            parts.append(f'<polygon points="{pts}" fill="{color}" stroke="{color}"/>')
        else:
            parts.append(f'<circle cx="{x * size:.2f}" cy="{(1 - y) * size:.2f}" r="{r:.2f}" '
                         f'fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_heatmap(archive: Archive, task_set: TaskSet, out_prefix) -> list[Path]:
    """Write ``<prefix>.csv`` (task_id, task params, fitness per filled slot)
    and, for 2-D task spaces, ``<prefix>.svg``."""
    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out_prefix.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["task_id"] + [f"task_{k}" for k in range(task_set.d_task)] + ["fitness"])
        for i in archive.filled_ids():
            w.writerow([int(i)] + [fmt_float(v) for v in task_set.params[i]]
                       + [fmt_float(archive.fitness[i])])
    written = [csv_path]
    if task_set.d_task == 2:
        svg_path = out_prefix.with_suffix(".svg")
        svg_path.write_text(heatmap_svg(archive, task_set), encoding="utf-8")
        written.append(svg_path)
    else:
        log.warning("task space is %d-D; heatmap written as CSV only", task_set.d_task)
    return written


def genome_rows(archive: Archive):
    for i in archive.filled_ids():
        for k, v in enumerate(archive.genomes[i]):
            yield int(i), k, float(v), float(archive.fitness[i])


def export_genome_plot(archive: Archive, path) -> Path:
    """Long-format genome dump: one row per (elite, parameter)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["elite_id", "param_index", "param_value", "fitness"])
        for eid, k, v, f in genome_rows(archive):
            w.writerow([eid, k, fmt_float(v), fmt_float(f)])
    return path


def top_elite_ids(archive: Archive, top_fraction: float) -> np.ndarray:
    if not 0 < top_fraction <= 1:
        raise ValueError("top_fraction must lie in (0, 1]")
    filled = archive.filled_ids()
    if filled.size == 0:
        raise ValueError("archive is empty")
    k = math.ceil(top_fraction * filled.size)
    order = np.argsort(-archive.fitness[filled], kind="stable")
    return filled[order[:k]]


def cross_evaluate_top_elites(archive: Archive, task_set: TaskSet, domain,
                              top_fraction: float = 0.05) -> np.ndarray:
    """Evaluate the best elites on every filled task.

    Returns a structured array with fields ``elite_id``, ``task_id``,
    ``fitness`` and ``delta`` where ``delta`` is the top elite's fitness on
    the task minus that task's own elite fitness.
    """
    top = top_elite_ids(archive, top_fraction)
    tasks = archive.filled_ids()
    out = np.zeros(len(top) * len(tasks), dtype=[("elite_id", "i8"), ("task_id", "i8"),
                                                  ("fitness", "f8"), ("delta", "f8")])
    for k, e in enumerate(top):
        genomes = np.broadcast_to(archive.genomes[e], (len(tasks), archive.d_genome))
        fit = np.asarray(domain(np.ascontiguousarray(genomes), task_set.params[tasks]), dtype=float)
        rows = out[k * len(tasks):(k + 1) * len(tasks)]
        rows["elite_id"] = e
        rows["task_id"] = tasks
        rows["fitness"] = fit
        rows["delta"] = fit - archive.fitness[tasks]
    return out


def write_cross_evaluation(rows: np.ndarray, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["elite_id", "task_id", "fitness", "delta"])
        for r in rows:
            w.writerow([int(r["elite_id"]), int(r["task_id"]), fmt_float(r["fitness"]),
                        fmt_float(r["delta"])])
    return path


def read_csv_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]
