import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GAMMA, PI, load
from nbwalk.errors import InsufficientStatisticsError, InvalidParamsError
from nbwalk.expsim import (
    ExperimentConfig,
    expected_counts,
    ideal_distribution,
    metadata,
    moment_stderr,
    noisy_sweep,
    sample_distribution,
    write_counts_csv,
)
from nbwalk.moments import moment, sweep_moments
from nbwalk.tables import read_table
from nbwalk.walk import WalkParams, walk_distribution

REF_WALK = next(c for c in load("walks.json") if abs(c["theta1"] - 0.56 * PI) < 1e-12)
SWEEP = np.arange(101) * 0.01 * PI


def ref_walk_params():
    return WalkParams(REF_WALK["theta1"], REF_WALK["theta2"], REF_WALK["gamma"], 0.0, REF_WALK["L"])


def test_config_validation():
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(InvalidParamsError):
            ExperimentConfig(outcoupling=bad)
    with pytest.raises(InvalidParamsError):
        ExperimentConfig(photons_per_run=0.5)
    with pytest.raises(InvalidParamsError):
        ExperimentConfig(basis="emitted")
    assert ExperimentConfig().attenuation_power(GAMMA) == pytest.approx(0.82**2)


def test_large_budget_matches_ideal():
    p = ref_walk_params()
    s = sample_distribution(p, ExperimentConfig(1e9, rng_seed=7), 7)
    ideal, start = ideal_distribution(p, 7)
    assert s.origin == start
    assert 0.5 * np.abs(s.distribution.probs - ideal.probs).sum() <= 1e-3


def test_poisson_variance():
    p = ref_walk_params()
    cfg = ExperimentConfig(2e4)
    lam, _ = expected_counts(p, cfg, 7)
    R = 400
    draws = np.array([
        sample_distribution(p, ExperimentConfig(2e4, rng_seed=s), 7).counts for s in range(R)
    ])
    mask = lam > 20
    var = draws[:, mask].var(axis=0, ddof=1)
    # sample variance of Poisson(lam): sd ~ lam * sqrt(2 / (R - 1)) for large lam
    sigma = np.sqrt(lam[mask] / R + 2 * lam[mask] ** 2 / (R - 1))
    assert np.all(np.abs(var - lam[mask]) < 3 * sigma)
    mean_sigma = np.sqrt(lam[mask] / R)
    assert np.all(np.abs(draws[:, mask].mean(axis=0) - lam[mask]) < 3 * mean_sigma)


def test_reference_moment_at_1e5():
    s = sample_distribution(ref_walk_params(), ExperimentConfig(1e5), 7)
    est = moment(s.distribution, 0.1, s.origin) / 7**0.1
    assert est == pytest.approx(REF_WALK["moment_0.1_normalized"], rel=1e-2)


def test_seeded_determinism():
    p = ref_walk_params()
    a = sample_distribution(p, ExperimentConfig(1e4, rng_seed=3), 7, index=5)
    b = sample_distribution(p, ExperimentConfig(1e4, rng_seed=3), 7, index=5)
    c = sample_distribution(p, ExperimentConfig(1e4, rng_seed=3), 7, index=6)
    np.testing.assert_array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)


@given(st.floats(0, 2 * PI), st.floats(0, 2 * PI), st.floats(-0.5, 0.5),
       st.integers(1, 10), st.floats(20, 1e6), st.integers(0, 2**31))
def test_normalization(t1, t2, g, N, photons, seed):
    s = sample_distribution(WalkParams(t1, t2, g, 0, 8), ExperimentConfig(photons, rng_seed=seed), N)
    assert s.counts.sum() > 0
    assert abs(s.distribution.probs.sum() - 1) <= 1e-12


@given(st.floats(0, 2 * PI), st.floats(0, 2 * PI), st.floats(-1, 1), st.integers(1, 15))
def test_passive_convention_equivalence(t1, t2, g, N):
    p = WalkParams(t1, t2, g, 0, 2 * N + 3)
    passive, start = ideal_distribution(p, N)
    direct, _ = walk_distribution(p, N, start)
    np.testing.assert_allclose(passive.probs, direct.probs, rtol=0, atol=1e-12)


def test_survival_model():
    p = WalkParams(0.3 * PI, 0.7 * PI, 0.0, 0.0, 17)
    N, photons = 7, 1e6
    mean = photons * 0.95**N * 0.05
    cfg = ExperimentConfig(photons, basis="injected")
    lam, _ = expected_counts(p, cfg, N)
    assert lam.sum() == pytest.approx(mean, rel=1e-12)
    totals = [sample_distribution(p, ExperimentConfig(photons, rng_seed=s, basis="injected"), N)
              .counts.sum() for s in range(20)]
    assert all(abs(t - mean) < 4 * np.sqrt(mean) for t in totals)


def test_detected_budget():
    lam, _ = expected_counts(ref_walk_params(), ExperimentConfig(1e3), 7)
    assert lam.sum() == pytest.approx(1e3, rel=1e-12)


def test_insufficient_statistics():
    p = ref_walk_params()
    with pytest.raises(InsufficientStatisticsError):
        sample_distribution(p, ExperimentConfig(5), 7)
    with pytest.raises(InsufficientStatisticsError):
        sample_distribution(p, ExperimentConfig(100, basis="injected"), 7)


def test_stderr_shrinks_with_counts():
    p = ref_walk_params()
    errs = []
    for photons in (1e3, 1e5):
        s = sample_distribution(p, ExperimentConfig(photons), 7)
        errs.append(moment_stderr(s.counts, 0.1, s.origin, 7))
    assert errs[1] == pytest.approx(errs[0] / 10, rel=0.2)


def test_low_photon_run_flagged():
    p = WalkParams(0, 0.58 * PI, GAMMA, 0, 17)
    run = noisy_sweep(p, SWEEP, ExperimentConfig(1e2), 7)
    assert run.low_confidence
    assert len(run.series.moments) == SWEEP.size


def test_high_photon_run_confident():
    p = WalkParams(0, 0.58 * PI, GAMMA, 0, 17)
    run = noisy_sweep(p, SWEEP, ExperimentConfig(1e9), 7)
    assert not run.low_confidence
    noiseless = sweep_moments(p, SWEEP, 0.1, 7).kinks
    assert len(run.series.kinks) == len(noiseless)
    assert np.allclose(run.series.kinks, noiseless, atol=0.03 * PI)


def test_sweep_unpacks_and_csv(tmp_path):
    p = WalkParams(0, 0.58 * PI, GAMMA, 0, 17)
    cfg = ExperimentConfig(1e4)
    series, counts = noisy_sweep(p, SWEEP[:10], cfg, 7)
    assert len(counts) == 10 and all(c.size == 17 for c in counts)
    meta = metadata(cfg, p, 7)
    assert meta["noise_model"] == "poisson" and meta["steps"] == 7
    path = tmp_path / "c.csv"
    write_counts_csv(path, SWEEP[:10], counts, meta)
    m, cols, rows = read_table(path)
    assert cols == ["theta1", "bin", "counts"] and len(rows) == 170
    assert m["rng_seed"] == cfg.rng_seed
    assert sum(int(r[2]) for r in rows) == sum(int(c.sum()) for c in counts)
