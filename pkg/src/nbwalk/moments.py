"""Displacement moments of walk distributions and kink detection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, InvalidParamsError
from .tables import write_table
from .walk import PositionDistribution, WalkParams, walk_distribution


@dataclass
class MomentSeries:
    sweep_values: np.ndarray
    moments: np.ndarray
    l: float
    N: int
    kinks: list = field(default_factory=list)


def moment(dist: PositionDistribution | np.ndarray, l: float, origin: int) -> float:
    """sum_m |m - origin|**l P(m), with 0**0 = 1."""
    if l < 0:
        raise InvalidParamsError("moment order must be non-negative")
    P = dist.probs if isinstance(dist, PositionDistribution) else np.asarray(dist)
    if not 0 <= origin < P.size:
        raise InvalidParamsError(f"origin {origin} outside lattice of {P.size} sites")
    m = np.abs(np.arange(P.size) - origin).astype(float)
    if l == 0:
        w = np.ones_like(m)
    else:
        w = np.where(m > 0, m ** l, 0.0)
    return float(np.dot(w, P))


def chain_params(p: WalkParams, N: int) -> WalkParams:
    """Open chain of 2N+3 sites: an N-step walker from the centre never
    reaches the edges."""
    return p.replace(delta=0.0, L=2 * N + 3)


def normalized_moment(p: WalkParams, N: int, l: float) -> float:
    q = chain_params(p, N)
    dist, start = walk_distribution(q, N)
    return moment(dist, l, start) / float(N) ** l


def sweep_moments(
    p_base: WalkParams,
    theta1_grid,
    l: float = 0.1,
    N: int = 80,
    sensitivity: float = 5.0,
) -> MomentSeries:
    grid = np.asarray(theta1_grid, dtype=float)
    if N < 1:
        raise InvalidParamsError("N must be >= 1")
    if np.any(np.diff(grid) <= 0):
        raise GridError("theta1 grid must be strictly ascending")
    vals = np.array([normalized_moment(p_base.replace(theta1=t), N, l) for t in grid])
    series = MomentSeries(grid, vals, float(l), int(N))
    if grid.size >= 7:
        series.kinks = detect_kinks(series, sensitivity)
    return series


def second_difference(y, h):
    y = np.asarray(y, dtype=float)
    return (y[2:] - 2 * y[1:-1] + y[:-2]) / (h * h)


def detect_kinks(series: MomentSeries, sensitivity: float = 5.0) -> list[float]:
    """Locations where |second difference| is a local maximum exceeding
    ``sensitivity`` times its median.  Flags closer than two grid steps
    are merged, keeping the strongest."""
    x = np.asarray(series.sweep_values, dtype=float)
    y = np.asarray(series.moments, dtype=float)
    if x.size < 7:
        raise GridError("kink detection needs at least 7 grid points")
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0) or h[0] <= 0:
        raise GridError("kink detection needs a uniform ascending grid")
    h = h[0]
    aD = np.abs(second_difference(y, h))
    med = np.median(aD)
    thresh = sensitivity * med
    flags = []
    for k in range(aD.size):
        left = aD[k - 1] if k > 0 else -np.inf
        right = aD[k + 1] if k + 1 < aD.size else -np.inf
        if aD[k] > thresh and aD[k] >= left and aD[k] >= right:
            if flags and k - flags[-1] <= 2:
                if aD[k] > aD[flags[-1]]:
                    flags[-1] = k
            else:
                flags.append(k)
    return [float(x[k + 1]) for k in flags]


def write_csv(path, series: MomentSeries, meta: dict | None = None) -> None:
    kinks = set(series.kinks)
    rows = ((t, m, t in kinks) for t, m in zip(series.sweep_values, series.moments))
    write_table(path, ["theta1", "moment_normalized", "is_kink"], rows, meta)
