"""Phase classification over (theta1, theta2) grids."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import WalkError
from .invariant import obc_gap, winding_sides
from .tables import read_table, write_table
from .walk import WalkParams

CLASSES = ("trivial", "nontrivial_plus", "nontrivial_minus", "exceptional", "unconverged")
WORKERS_ENV = "NBWALK_WORKERS"
DEGENERACY_EPS = 1e-9


@dataclass(frozen=True)
class ClassifyOptions:
    L: int = 128
    scheme: str = "wilson"
    side: str = "inside"
    backend: str = "native"
    deltas: tuple | None = None


@dataclass(frozen=True)
class PhasePoint:
    theta1: float
    theta2: float
    v_quantized: Fraction
    gap: float
    phase_class: str
    v: float = float("nan")
    converged: bool = False


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def class_of(v_quantized: Fraction, converged: bool) -> str:
    if not converged:
        return "unconverged"
    if v_quantized.denominator != 1:
        return "exceptional"
    if v_quantized == 0:
        return "trivial"
    return "nontrivial_plus" if v_quantized > 0 else "nontrivial_minus"


def _nudge(theta: float) -> float:
    """Move off the angles where cos(theta/2) = 0."""
    return theta + DEGENERACY_EPS if abs(np.cos(theta / 2)) < DEGENERACY_EPS else theta


def classify(p: WalkParams, opts: ClassifyOptions = ClassifyOptions()) -> PhasePoint:
    q = p.replace(theta1=_nudge(p.theta1), theta2=_nudge(p.theta2))
    res = winding_sides(q, opts.deltas, opts.scheme, (opts.side,), backend=opts.backend)[opts.side]
    gap = obc_gap(q, backend=opts.backend)
    return PhasePoint(p.theta1, p.theta2, res.v_quantized, gap,
                      class_of(res.v_quantized, res.converged), res.v, res.converged)


def _grid_axis(lo, hi, n):
    return lo + (hi - lo) * np.arange(n) / n


def _work(args):
    i, j, t1, t2, gamma, opts = args
    p = WalkParams(t1, t2, gamma, 0.0, opts.L)
    try:
        pt = classify(p, opts)
    except WalkError:
        pt = PhasePoint(t1, t2, Fraction(0), float("nan"), "unconverged")
    return i, j, pt


_COLUMNS = ["i", "j", "theta1", "theta2", "v_quantized_num", "v_quantized_den", "gap", "class", "v"]


def _row(i, j, pt):
    return (i, j, pt.theta1, pt.theta2, pt.v_quantized.numerator, pt.v_quantized.denominator,
            pt.gap, pt.phase_class, pt.v)


def _load_existing(path, meta):
    if not path or not os.path.exists(path):
        return {}
    old_meta, cols, rows = read_table(path)
    if old_meta != meta or cols != _COLUMNS:
        return None
    done = {}
    for r in rows:
        i, j = int(r[0]), int(r[1])
        v = Fraction(int(r[4]), int(r[5]))
        done[(i, j)] = PhasePoint(float(r[2]), float(r[3]), v, float(r[6]), r[7], float(r[8]),
                                  r[7] != "unconverged")
    return done


def phase_grid(
    theta1_range=(0.0, 2 * np.pi),
    theta2_range=(0.0, 2 * np.pi),
    resolution: int = 64,
    gamma: float = float(np.log(0.82)),
    opts: ClassifyOptions = ClassifyOptions(),
    out_csv: str | None = None,
    workers: int | None = None,
) -> list[list[PhasePoint]]:
    """Classify a resolution x resolution grid (endpoints excluded).

    With ``out_csv`` every finished point is appended immediately and a
    rerun with the same configuration only computes missing points.
    Returns rows indexed ``[j][i]`` (theta2 index, theta1 index).
    """
    if resolution < 8:
        raise ValueError("resolution must be >= 8 per axis")
    t1s = _grid_axis(*theta1_range, resolution)
    t2s = _grid_axis(*theta2_range, resolution)
    meta = {
        "command": "phases",
        "theta1_range": list(map(float, theta1_range)),
        "theta2_range": list(map(float, theta2_range)),
        "resolution": int(resolution),
        "gamma": float(gamma),
        "options": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(opts).items()},
    }
    done = _load_existing(out_csv, meta)
    if done is None:
        raise WalkError(f"{out_csv} holds a grid with a different configuration")
    if out_csv and not done:
        write_table(out_csv, _COLUMNS, [], meta)
    todo = [
        (i, j, float(t1s[i]), float(t2s[j]), float(gamma), opts)
        for j in range(resolution)
        for i in range(resolution)
        if (i, j) not in done
    ]
    workers = default_workers() if workers is None else max(1, int(workers))

    def record(i, j, pt):
        done[(i, j)] = pt
        if out_csv:
            write_table(out_csv, _COLUMNS, [_row(i, j, pt)], mode="a")

    if workers == 1 or len(todo) <= 1:
        for item in todo:
            record(*_work(item))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, j, pt in pool.map(_work, todo, chunksize=4):
                record(i, j, pt)
    return [[done[(i, j)] for i in range(resolution)] for j in range(resolution)]


def class_index_grid(grid) -> np.ndarray:
    return np.array([[CLASSES.index(pt.phase_class) for pt in row] for row in grid])


def boundary_segments(grid) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Cell edges separating different classes, in (theta1, theta2) units."""
    cls = class_index_grid(grid)
    ny, nx = cls.shape
    x = np.array([pt.theta1 for pt in grid[0]])
    y = np.array([row[0].theta2 for row in grid])
    hx = x[1] - x[0]
    hy = y[1] - y[0]
    segs = []
    for j in range(ny):
        for i in range(nx - 1):
            if cls[j, i] != cls[j, i + 1]:
                xm = x[i] + hx / 2
                segs.append(((xm, y[j] - hy / 2), (xm, y[j] + hy / 2)))
    for j in range(ny - 1):
        for i in range(nx):
            if cls[j, i] != cls[j + 1, i]:
                ym = y[j] + hy / 2
                segs.append(((x[i] - hx / 2, ym), (x[i] + hx / 2, ym)))
    return segs


def write_plot_data(path, grid) -> None:
    """Blocks of ``x y class_index`` lines, one block per theta2 row."""
    with open(path, "w") as fh:
        fh.write("# x y class_index  (" + ", ".join(f"{k}={c}" for k, c in enumerate(CLASSES)) + ")\n")
        for row in grid:
            for pt in row:
                fh.write(f"{pt.theta1:.17g} {pt.theta2:.17g} {CLASSES.index(pt.phase_class)}\n")
            fh.write("\n")


def write_boundaries(path, segments) -> None:
    with open(path, "w") as fh:
        fh.write("# x y  (segments separated by blank lines)\n")
        for (x0, y0), (x1, y1) in segments:
            fh.write(f"{x0:.17g} {y0:.17g}\n{x1:.17g} {y1:.17g}\n\n")
