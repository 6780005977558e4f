from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GAMMA, PI
from nbwalk import phases
from nbwalk.errors import WalkError
from nbwalk.moments import sweep_moments
from nbwalk.phases import (
    CLASSES,
    ClassifyOptions,
    PhasePoint,
    boundary_segments,
    class_index_grid,
    class_of,
    classify,
    phase_grid,
    write_boundaries,
    write_plot_data,
)
from nbwalk.tables import read_table
from nbwalk.walk import WalkParams

SMALL = ClassifyOptions(L=32)
halves = st.integers(-8, 8).map(lambda n: Fraction(n, 2))


def rows(grid):
    return [(pt.theta1, pt.theta2, pt.v_quantized, pt.gap, pt.phase_class, pt.v)
            for row in grid for pt in row]


@pytest.fixture(scope="module")
def lossy_grid():
    return phase_grid((0.1 * PI, 1.9 * PI), (0.1 * PI, 1.9 * PI), 8, GAMMA, SMALL, workers=1)


@pytest.fixture(scope="module")
def unitary_grid():
    return phase_grid((0, 2 * PI), (0, 2 * PI), 8, 0.0, SMALL, workers=1)


def test_class_examples():
    assert class_of(Fraction(0), True) == "trivial"
    assert class_of(Fraction(1, 2), True) == "exceptional"
    assert class_of(Fraction(-3, 2), True) == "exceptional"
    assert class_of(Fraction(1), True) == "nontrivial_plus"
    assert class_of(Fraction(-1), True) == "nontrivial_minus"
    assert class_of(Fraction(1, 2), False) == "unconverged"


@given(halves, st.booleans())
def test_class_totality(v, converged):
    c = class_of(v, converged)
    assert c in CLASSES
    assert (c == "trivial") == (v == 0 and converged)
    if converged:
        assert (c == "exceptional") == (v.denominator == 2)


def test_classify_points():
    trivial = classify(WalkParams(0.3 * PI, 0.58 * PI, GAMMA, 0, 64), ClassifyOptions(L=64))
    assert trivial.phase_class == "trivial" and trivial.v_quantized == 0
    exc = classify(WalkParams(0.6 * PI, 0.58 * PI, GAMMA, 0, 64), ClassifyOptions(L=64))
    assert exc.phase_class == "exceptional" and exc.v_quantized.denominator == 2
    assert exc.gap < 0.1


def test_gapped_points_not_exceptional(lossy_grid):
    gapped = [pt for row in lossy_grid for pt in row if pt.gap > 0.1]
    assert gapped
    assert all(pt.phase_class != "exceptional" for pt in gapped)


def test_grid_is_total(lossy_grid):
    assert len(lossy_grid) == 8 and all(len(r) == 8 for r in lossy_grid)
    assert all(pt.phase_class in CLASSES for row in lossy_grid for pt in row)
    t2 = [row[0].theta2 for row in lossy_grid]
    assert t2 == sorted(t2) and all(row[0].theta1 == lossy_grid[0][0].theta1 for row in lossy_grid)


def test_unitary_grid_has_no_exceptional(unitary_grid):
    found = {pt.phase_class for row in unitary_grid for pt in row}
    assert "exceptional" not in found
    assert {"trivial", "nontrivial_minus"} <= found


def test_determinism(lossy_grid):
    again = phase_grid((0.1 * PI, 1.9 * PI), (0.1 * PI, 1.9 * PI), 8, GAMMA, SMALL, workers=1)
    np.testing.assert_equal(rows(again), rows(lossy_grid))


def test_resolution_floor():
    with pytest.raises(ValueError):
        phase_grid(resolution=4)


def test_resume(tmp_path, monkeypatch, lossy_grid):
    path = tmp_path / "grid.csv"
    args = ((0.1 * PI, 1.9 * PI), (0.1 * PI, 1.9 * PI), 8, GAMMA, SMALL)
    full = phase_grid(*args, out_csv=str(path), workers=1)
    np.testing.assert_equal(rows(full), rows(lossy_grid))
    text = path.read_text().splitlines()
    path.write_text("\n".join(text[:2 + 40]) + "\n")  # metadata, header, 40 rows

    calls = []
    real = phases.classify

    def counting(p, opts):
        calls.append((p.theta1, p.theta2))
        return real(p, opts)

    monkeypatch.setattr(phases, "classify", counting)
    resumed = phase_grid(*args, out_csv=str(path), workers=1)
    assert len(calls) == 24
    np.testing.assert_equal(rows(resumed), rows(full))
    _, cols, table = read_table(path)
    assert cols[:8] == ["i", "j", "theta1", "theta2", "v_quantized_num", "v_quantized_den",
                        "gap", "class"]
    assert len(table) == 64


def test_resume_rejects_other_config(tmp_path):
    path = tmp_path / "grid.csv"
    phase_grid((0, 1), (0, 1), 8, GAMMA, ClassifyOptions(L=16), out_csv=str(path), workers=1)
    with pytest.raises(WalkError):
        phase_grid((0, 1), (0, 1), 8, 0.0, ClassifyOptions(L=16), out_csv=str(path), workers=1)


def _synthetic(classes):
    n = len(classes)
    return [[PhasePoint(i * 0.1, j * 0.1, Fraction(0), 1.0, classes[j][i]) for i in range(n)]
            for j in range(n)]


def test_boundary_segments():
    cls = [["trivial"] * 4 for _ in range(4)]
    for row in cls:
        row[2] = row[3] = "nontrivial_plus"
    segs = boundary_segments(_synthetic(cls))
    assert len(segs) == 4
    for (x0, y0), (x1, y1) in segs:
        assert x0 == x1 == pytest.approx(0.15)
        assert abs(y1 - y0) == pytest.approx(0.1)
    assert boundary_segments(_synthetic([["trivial"] * 3] * 3)) == []


def test_plot_files(tmp_path, lossy_grid):
    data = tmp_path / "grid.dat"
    write_plot_data(data, lossy_grid)
    blocks = [b for b in data.read_text().split("\n\n") if b.strip()]
    assert len(blocks) == 8
    body = [ln for ln in data.read_text().splitlines() if ln and not ln.startswith("#")]
    idx = np.array([int(ln.split()[2]) for ln in body]).reshape(8, 8)
    np.testing.assert_array_equal(idx, class_index_grid(lossy_grid))
    segs = boundary_segments(lossy_grid)
    bpath = tmp_path / "b.dat"
    write_boundaries(bpath, segs)
    pts = [ln for ln in bpath.read_text().splitlines() if ln and not ln.startswith("#")]
    assert len(pts) == 2 * len(segs)


@pytest.mark.parametrize("theta2", [0.3, 0.58, 0.8])
def test_cut_boundaries_match_kinks(theta2):
    t1s = np.arange(51) * 0.02 * PI
    opts = ClassifyOptions(L=64)
    cls = [classify(WalkParams(t, theta2 * PI, GAMMA, 0, 64), opts).phase_class for t in t1s]
    edges = [0.5 * (t1s[i] + t1s[i + 1]) for i in range(50) if cls[i] != cls[i + 1]]
    assert edges
    base = WalkParams(0, theta2 * PI, GAMMA, 0, 17)
    kinks = np.array(sweep_moments(base, np.arange(101) * 0.01 * PI, 0.1, 80).kinks)
    cell = t1s[1] - t1s[0]
    for e in edges:
        assert np.min(np.abs(kinks - e)) <= cell + 1e-12
