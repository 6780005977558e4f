import cmath

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import GAMMA, PI, cplx, load
from nbwalk.errors import (
    DimensionError,
    InsufficientSamplingError,
    MalformedContourError,
    NonConvergenceError,
)
from nbwalk.numerics import (
    eigendecompose,
    eigenvalues,
    order_contour,
    polygon_winding,
    solve_quadratic,
    solve_quadratic_batch,
)

finite = st.floats(-10, 10, allow_nan=False)
moduli = st.floats(1e-6, 1e6)
phases = st.floats(-PI, PI)


@st.composite
def complexes(draw, zero=False):
    if zero and draw(st.booleans()):
        return 0j
    return cmath.rect(draw(moduli), draw(phases))


@st.composite
def square_matrices(draw, max_n=20):
    n = draw(st.integers(1, max_n))
    re = draw(arrays(np.float64, (n, n), elements=finite))
    im = draw(arrays(np.float64, (n, n), elements=finite))
    return re + 1j * im


def match_distance(a, b):
    """Largest distance from any element of one multiset to the other."""
    d = np.abs(a[:, None] - b[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


class TestEigendecompose:
    def test_identity(self):
        pairs = eigendecompose(np.eye(4))
        assert len(pairs) == 4
        for pr in pairs:
            assert pr.value == pytest.approx(1.0, abs=1e-15)
            assert pr.residual == 0.0

    def test_swap(self):
        vals = sorted(pr.value.real for pr in eigendecompose([[0, 1], [1, 0]]))
        assert vals == pytest.approx([-1.0, 1.0], abs=1e-14)

    @pytest.mark.parametrize("backend", ["native", "lapack"])
    def test_against_charpoly_oracle(self, backend):
        d = load("eig64.json")
        a = np.array(d["matrix_re"]) + 1j * np.array(d["matrix_im"])
        ref = cplx(d["eigenvalues"])
        pairs = eigendecompose(a, tol=1e-8, backend=backend)
        assert len(pairs) == 64
        assert max(pr.residual for pr in pairs) <= 1e-8
        got = np.array([pr.value for pr in pairs])
        assert match_distance(got, ref) < 1e-6
        # all oracle roots are distinct, so nearest matching is a bijection
        nearest = np.abs(got[:, None] - ref[None, :]).argmin(axis=1)
        assert len(set(nearest)) == 64

    def test_eigenvalues_only_match_pairs(self):
        d = load("eig64.json")
        a = np.array(d["matrix_re"]) + 1j * np.array(d["matrix_im"])
        assert match_distance(eigenvalues(a), cplx(d["eigenvalues"])) < 1e-9

    @pytest.mark.parametrize("bad", [np.zeros((3, 4)), np.zeros((0, 0)), np.zeros(5)])
    def test_dimension_errors(self, bad):
        with pytest.raises(DimensionError):
            eigendecompose(bad)

    def test_non_finite(self):
        a = np.eye(3)
        a[1, 2] = np.nan
        with pytest.raises(DimensionError):
            eigenvalues(a)

    def test_iteration_cap_names_index(self):
        a = np.random.default_rng(3).normal(size=(12, 12)) + 0j
        with pytest.raises(NonConvergenceError) as info:
            eigenvalues(a, max_sweeps=2)
        assert 0 <= info.value.stalled_index < 12

    def test_defective_reports_residual(self):
        j = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])
        pairs = eigendecompose(j, tol=1e-8)
        assert len(pairs) == 3
        for pr in pairs:
            assert abs(pr.value - 2.0) < 1e-4
            honest = np.linalg.norm(j @ pr.vector - pr.value * pr.vector)
            assert pr.residual == pytest.approx(honest, rel=1e-6, abs=1e-15)

    def test_absolute_deflation_option(self):
        a = np.random.default_rng(5).normal(size=(30, 30)) + 0j
        w = eigenvalues(a, deflation_tol=1e-14)
        assert match_distance(w, np.linalg.eigvals(a)) < 1e-10

    @given(square_matrices())
    def test_count_norm_trace_on_any_matrix(self, a):
        pairs = eigendecompose(a, tol=1e-8)
        n = a.shape[0]
        assert len(pairs) == n
        scale = max(1.0, np.linalg.norm(a))
        for pr in pairs:
            assert abs(np.linalg.norm(pr.vector) - 1.0) <= 1e-12
            honest = np.linalg.norm(a @ pr.vector - pr.value * pr.vector)
            assert pr.residual == pytest.approx(honest, rel=1e-6, abs=1e-14 * scale)
        total = sum(pr.value for pr in pairs)
        assert abs(total - np.trace(a)) <= 1e-8 * n * scale

    @given(st.integers(1, 48), st.integers(0, 2**32 - 1), st.floats(0.01, 100))
    def test_residual_bound_generic(self, n, seed, scale):
        rng = np.random.default_rng(seed)
        a = scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        pairs = eigendecompose(a, tol=1e-8 * scale)
        assert max(pr.residual for pr in pairs) <= 1e-8 * scale

    def test_trace_unit_scale(self):
        rng = np.random.default_rng(11)
        for n in (16, 64, 256):
            a = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2 * n)
            assert abs(eigenvalues(a).sum() - np.trace(a)) <= 1e-8 * n


class TestSolveQuadratic:
    def test_real_pair(self):
        assert solve_quadratic(0, -1) == (-1, 1)

    def test_imaginary_pair(self):
        z1, z2 = solve_quadratic(0, 1)
        assert z1 == pytest.approx(-1j, abs=1e-15)
        assert z2 == pytest.approx(1j, abs=1e-15)

    def test_cancellation(self):
        # roots 1e-9 and 1e9: naive formula loses the small one
        z1, z2 = solve_quadratic(-(1e9 + 1e-9), 1.0)
        assert z1 == pytest.approx(1e-9, rel=1e-14)
        assert z2 == pytest.approx(1e9, rel=1e-14)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            solve_quadratic(np.inf, 1)

    @given(complexes(zero=True), complexes(zero=True))
    def test_vieta_and_residual(self, b, c):
        z1, z2 = solve_quadratic(b, c)
        # equal moduli are ordered by argument, so allow an ulp either way
        assert abs(z1) <= abs(z2) * (1 + 1e-14)
        big = max(abs(z1), abs(z2))
        assert abs(z1 * z2 - c) <= 1e-12 * max(abs(c), abs(z1) * abs(z2))
        assert abs(z1 + z2 + b) <= 1e-12 * max(abs(b), big)
        scale = max(1.0, abs(b), abs(c))
        for z in (z1, z2):
            assert abs(z * z + b * z + c) <= 1e-12 * scale * max(1.0, abs(z) ** 2 / scale)

    @given(st.lists(st.tuples(complexes(zero=True), complexes(zero=True)), min_size=1, max_size=20))
    def test_batch_matches_scalar(self, pairs):
        b = np.array([p[0] for p in pairs])
        c = np.array([p[1] for p in pairs])
        lo, hi = solve_quadratic_batch(b, c)
        for k, (bb, cc) in enumerate(pairs):
            ref = sorted(solve_quadratic(bb, cc), key=lambda z: (abs(z), cmath.phase(z)))
            got = sorted((lo[k], hi[k]), key=lambda z: (abs(z), cmath.phase(z)))
            tol = 1e-12 * max(1.0, abs(ref[1]))
            assert abs(got[0] - ref[0]) <= tol or abs(got[0] - ref[1]) <= tol
            assert abs(lo[k]) <= abs(hi[k]) * (1 + 1e-14)


class TestOrderContour:
    def test_shuffled_circle(self):
        pts = np.exp(2j * PI * np.arange(16) / 16)
        shuffled = np.random.default_rng(0).permutation(pts)
        out = order_contour(shuffled)
        np.testing.assert_allclose(out, pts, atol=1e-15)

    def test_concentric_loops_rejected(self):
        k = np.arange(40)
        pts = np.concatenate([np.exp(2j * PI * k / 40), 2 * np.exp(2j * PI * (k + 0.5) / 40)])
        with pytest.raises(MalformedContourError):
            order_contour(pts)

    def test_too_few(self):
        with pytest.raises(InsufficientSamplingError):
            order_contour(np.exp(2j * PI * np.arange(7) / 7))

    def test_gbc_inside_loop(self):
        from nbwalk.gbz import contour_points
        from nbwalk.walk import WalkParams

        p = WalkParams(0.6 * PI, 0.58 * PI, GAMMA, 0.5, 64)
        inside, _, _ = contour_points(p)
        out = order_contour(inside)
        assert polygon_winding(out, np.mean(out)) == 1

    @given(
        st.integers(8, 200),
        st.floats(0.1, 10),
        st.floats(0, 0.3),
        st.integers(0, 2**32 - 1),
    )
    def test_permutation_of_input(self, n, radius, wobble, seed):
        rng = np.random.default_rng(seed)
        th = np.sort(rng.uniform(0, 2 * PI, n))
        assume(np.min(np.diff(np.append(th, th[0] + 2 * PI))) > 1e-6)
        r = radius * (1 + wobble * np.cos(3 * th) / 3)
        pts = rng.permutation(r * np.exp(1j * th) + complex(rng.normal(), rng.normal()))
        out = np.array(order_contour(pts))
        assert sorted(out, key=lambda z: (z.real, z.imag)) == sorted(
            pts, key=lambda z: (z.real, z.imag)
        )
        rel = out - out.mean()
        ang = np.mod(np.angle(rel), 2 * PI)
        assert np.all(np.diff(ang) >= 0)
