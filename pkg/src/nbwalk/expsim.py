"""Photon-counting model of a time-multiplexed walk measurement.

Each round trip out-couples a fraction of the light for detection.  The
walk itself is run with the passive-loss operator M_p = e^gamma M, which
multiplies only the down amplitude by e^(2 gamma); normalised
distributions are identical to those of M.

``photons_per_run`` is the expected number of detected photons by
default.  With ``basis="injected"`` it counts photons entering the loop
instead, and the detected mean follows from the round-trip survival
(1 - outcoupling)^N * outcoupling and the passive attenuation.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InsufficientStatisticsError, InvalidParamsError
from .moments import MomentSeries, chain_params, detect_kinks, moment, second_difference
from .tables import write_table
from .walk import (
    PositionDistribution,
    WalkParams,
    apply_step,
    localized_state,
)


@dataclass(frozen=True)
class ExperimentConfig:
    photons_per_run: float = 1e5
    outcoupling: float = 0.05
    rng_seed: int = 2024
    basis: str = "detected"

    def __post_init__(self):
        if self.basis not in ("detected", "injected"):
            raise InvalidParamsError(f"unknown photon basis {self.basis!r}")
        if not 0.0 < self.outcoupling < 1.0:
            raise InvalidParamsError("outcoupling must lie in (0, 1)")
        if not self.photons_per_run >= 1:
            raise InvalidParamsError("photons_per_run must be >= 1")

    def attenuation_power(self, gamma: float) -> float:
        """Down-path coefficient of M_p per step (amplitude e^(2 gamma))."""
        return float(np.exp(2.0 * gamma))


@dataclass(frozen=True)
class SampledDistribution:
    distribution: PositionDistribution
    counts: np.ndarray
    expected: np.ndarray
    origin: int


def passive_intensity(p: WalkParams, N: int, start: int) -> np.ndarray:
    """Per-site intensity after N steps with the down-only attenuator."""
    psi = localized_state(p.L, start)
    scale = np.exp(p.gamma)
    for _ in range(N):
        psi = scale * apply_step(p, psi)
    return np.abs(psi[0::2]) ** 2 + np.abs(psi[1::2]) ** 2


def expected_counts(p: WalkParams, cfg: ExperimentConfig, N: int):
    """Mean detected photons per time bin and the walker origin."""
    q = chain_params(p, N)
    start = q.L // 2
    inten = passive_intensity(q, N, start)
    if cfg.basis == "detected":
        return cfg.photons_per_run * inten / inten.sum(), start
    survival = (1.0 - cfg.outcoupling) ** N * cfg.outcoupling
    return cfg.photons_per_run * survival * inten, start


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    """Independent stream per grid point, fixed by (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def sample_distribution(
    p: WalkParams,
    cfg: ExperimentConfig,
    N: int,
    index: int = 0,
) -> SampledDistribution:
    lam, start = expected_counts(p, cfg, N)
    if lam.sum() < 10:
        raise InsufficientStatisticsError(
            f"expected {lam.sum():.3g} detected photons, need at least 10"
        )
    counts = rng_for(cfg.rng_seed, index).poisson(lam)
    if counts.sum() == 0:
        raise InsufficientStatisticsError("no photons detected")
    dist = PositionDistribution(counts / counts.sum(), float(counts.sum()))
    return SampledDistribution(dist, counts, lam, start)


def ideal_distribution(p: WalkParams, N: int) -> tuple[PositionDistribution, int]:
    """Noise-free distribution under the passive-loss convention."""
    q = chain_params(p, N)
    start = q.L // 2
    inten = passive_intensity(q, N, start)
    return PositionDistribution(inten / inten.sum(), float(inten.sum())), start


def moment_stderr(counts: np.ndarray, l: float, origin: int, N: int) -> float:
    """Shot-noise standard error of the normalised moment from raw counts."""
    n = counts.sum()
    P = counts / n
    m = np.abs(np.arange(counts.size) - origin).astype(float)
    w = np.ones_like(m) if l == 0 else np.where(m > 0, m ** l, 0.0)
    var = max(float(P @ w**2 - (P @ w) ** 2), 0.0)
    return float(np.sqrt(var / n)) / float(N) ** l


@dataclass
class NoisySweep:
    series: MomentSeries
    counts: list
    stderr: np.ndarray
    noise_floor: float
    low_confidence: bool

    def __iter__(self):
        # unpacks as (series, counts)
        return iter((self.series, self.counts))


# shot noise this large against the typical curvature inflates the
# detector's median and can create or hide flags
LOW_CONFIDENCE_RATIO = 0.5


def noisy_sweep(
    p_base: WalkParams,
    theta1_grid,
    cfg: ExperimentConfig,
    N: int = 7,
    l: float = 0.1,
    sensitivity: float = 5.0,
) -> NoisySweep:
    """Moment series from sampled counts.

    ``noise_floor`` is the expected |second difference| from shot noise
    alone, sqrt(6) * median(stderr) / h^2.  The run is flagged
    low-confidence when it reaches LOW_CONFIDENCE_RATIO times the median
    |second difference| of the sampled series.
    """
    grid = np.asarray(theta1_grid, dtype=float)
    vals, all_counts, errs = [], [], []
    for i, t in enumerate(grid):
        s = sample_distribution(p_base.replace(theta1=t), cfg, N, index=i)
        vals.append(moment(s.distribution, l, s.origin) / float(N) ** l)
        all_counts.append(s.counts)
        errs.append(moment_stderr(s.counts, l, s.origin, N))
    series = MomentSeries(grid, np.array(vals), float(l), int(N))
    errs = np.array(errs)
    floor, low = float("nan"), True
    if grid.size >= 7:
        series.kinks = detect_kinks(series, sensitivity)
        h = grid[1] - grid[0]
        floor = float(np.sqrt(6.0) * np.median(errs) / h**2)
        typical = float(np.median(np.abs(second_difference(series.moments, h))))
        low = floor >= LOW_CONFIDENCE_RATIO * typical
    return NoisySweep(series, all_counts, errs, floor, low)


def metadata(cfg: ExperimentConfig, p: WalkParams, N: int) -> dict:
    out = asdict(cfg)
    out.update(
        attenuation_power=cfg.attenuation_power(p.gamma),
        walk=asdict(p),
        steps=N,
        noise_model="poisson",
    )
    return out


def write_counts_csv(path, grid, counts, meta: dict | None = None) -> None:
    rows = ((t, b, int(c)) for t, cs in zip(grid, counts) for b, c in enumerate(cs))
    write_table(path, ["theta1", "bin", "counts"], rows, meta)
