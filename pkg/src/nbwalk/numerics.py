"""Dense complex linear algebra and contour utilities.

The eigensolver is a Hessenberg reduction followed by an implicitly
shifted single-shift complex QR iteration.  Eigenvectors are recovered by
inverse iteration on the Hessenberg form and mapped back with the
accumulated Householder reflectors.  Kernels are compiled with numba.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    DimensionError,
    InsufficientSamplingError,
    MalformedContourError,
    NonConvergenceError,
)

EPS = np.finfo(float).eps
SAFE_MIN = np.finfo(float).tiny


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray
    residual: float


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _hessenberg(a):
    """Householder reduction A = Q H Q^H. Returns (H, Q)."""
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=np.complex128)
    v = np.empty(n, dtype=np.complex128)
    for k in range(n - 2):
        m = n - k - 1
        alpha = 0.0
        for i in range(m):
            z = h[k + 1 + i, k]
            alpha += z.real * z.real + z.imag * z.imag
        alpha = np.sqrt(alpha)
        if alpha == 0.0:
            continue
        x0 = h[k + 1, k]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        for i in range(m):
            v[i] = h[k + 1 + i, k]
        v[0] += phase * alpha
        vn = 0.0
        for i in range(m):
            vn += v[i].real * v[i].real + v[i].imag * v[i].imag
        vn = np.sqrt(vn)
        for i in range(m):
            v[i] /= vn
        # left: rows k+1.., columns k..
        for j in range(k, n):
            s = 0.0j
            for i in range(m):
                s += np.conj(v[i]) * h[k + 1 + i, j]
            s *= 2.0
            for i in range(m):
                h[k + 1 + i, j] -= v[i] * s
        # right: all rows, columns k+1..
        for i in range(n):
            s = 0.0j
            for jj in range(m):
                s += h[i, k + 1 + jj] * v[jj]
            s *= 2.0
            for jj in range(m):
                h[i, k + 1 + jj] -= s * np.conj(v[jj])
            s = 0.0j
            for jj in range(m):
                s += q[i, k + 1 + jj] * v[jj]
            s *= 2.0
            for jj in range(m):
                q[i, k + 1 + jj] -= s * np.conj(v[jj])
        for i in range(k + 2, n):
            h[i, k] = 0.0
    return h, q


@njit(cache=True)
def _hqr_eigenvalues(h_in, max_sweeps, abs_tol):
    """Single-shift implicit QR on an upper Hessenberg matrix.

    Returns (eigenvalues, status) where status is -1 on success or the
    index of the trailing active row when the sweep budget ran out.
    """
    n = h_in.shape[0]
    h = h_in.copy()
    w = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        if hi == 0:
            w[0] = h[0, 0]
            break
        lo = 0
        for k in range(hi, 0, -1):
            sub = abs(h[k, k - 1])
            tst = abs(h[k, k]) + abs(h[k - 1, k - 1])
            if sub <= max(abs_tol, 2.220446049250313e-16 * tst, 1e-300):
                h[k, k - 1] = 0.0
                lo = k
                break
        if lo == hi:
            w[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        if total >= max_sweeps:
            return w, hi
        a11 = h[hi - 1, hi - 1]
        a12 = h[hi - 1, hi]
        a21 = h[hi, hi - 1]
        a22 = h[hi, hi]
        if its > 0 and its % 10 == 0:
            mu = a22 + 0.75 * abs(a21) * (1.0 + 0.5j)
        else:
            half = 0.5 * (a11 - a22)
            disc = np.sqrt(half * half + a12 * a21)
            m1 = a22 - a12 * a21 / (half + disc) if abs(half + disc) > 0 else a22
            m2 = a22 - a12 * a21 / (half - disc) if abs(half - disc) > 0 else a22
            mu = m1 if abs(m1 - a22) <= abs(m2 - a22) else m2
        x = h[lo, lo] - mu
        y = h[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            r = np.hypot(abs(x), abs(y))
            if r == 0.0:
                cx = 1.0 + 0.0j
                sy = 0.0j
            else:
                cx = x / r
                sy = y / r
            if k > lo:
                h[k, k - 1] = r
                h[k + 1, k - 1] = 0.0
            ccx = np.conj(cx)
            csy = np.conj(sy)
            for j in range(k, hi + 1):
                p = h[k, j]
                s = h[k + 1, j]
                h[k, j] = ccx * p + csy * s
                h[k + 1, j] = -sy * p + cx * s
            top = min(k + 2, hi)
            for i in range(lo, top + 1):
                p = h[i, k]
                s = h[i, k + 1]
                h[i, k] = p * cx + s * sy
                h[i, k + 1] = -p * csy + s * ccx
        its += 1
        total += 1
    return w, -1


@njit(cache=True)
def _inverse_iteration(h, lam, n_iter, hnorm):
    """Solve (H - lam I) x = b repeatedly for a Hessenberg H."""
    n = h.shape[0]
    u = h.copy()
    for i in range(n):
        u[i, i] -= lam
    mult = np.zeros(max(n - 1, 1), dtype=np.complex128)
    piv = np.zeros(max(n - 1, 1), dtype=np.bool_)
    tiny = max(hnorm, 1.0) * 2.220446049250313e-16
    for k in range(n - 1):
        if abs(u[k + 1, k]) > abs(u[k, k]):
            for j in range(k, n):
                t = u[k, j]
                u[k, j] = u[k + 1, j]
                u[k + 1, j] = t
            piv[k] = True
        if abs(u[k, k]) < tiny:
            u[k, k] = tiny
        m = u[k + 1, k] / u[k, k]
        mult[k] = m
        u[k + 1, k] = 0.0
        for j in range(k + 1, n):
            u[k + 1, j] -= m * u[k, j]
    if abs(u[n - 1, n - 1]) < tiny:
        u[n - 1, n - 1] = tiny
    x = np.ones(n, dtype=np.complex128)
    for it in range(n_iter):
        b = x.copy()
        if it > 0:
            for k in range(n - 1):
                if piv[k]:
                    t = b[k]
                    b[k] = b[k + 1]
                    b[k + 1] = t
                b[k + 1] -= mult[k] * b[k]
        for i in range(n - 1, -1, -1):
            s = b[i]
            for j in range(i + 1, n):
                s -= u[i, j] * b[j]
            b[i] = s / u[i, i]
        nrm = 0.0
        for i in range(n):
            nrm += b[i].real * b[i].real + b[i].imag * b[i].imag
        nrm = np.sqrt(nrm)
        if not np.isfinite(nrm) or nrm == 0.0:
            break
        for i in range(n):
            x[i] = b[i] / nrm
    return x


# ----------------------------------------------------------- public API


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("matrix has non-finite entries")
    return np.ascontiguousarray(a)


def _native_eigvals(a, deflation_tol, max_sweeps=None):
    n = a.shape[0]
    if n == 1:
        return a[0].copy(), None, None
    h, q = _hessenberg(a)
    abs_tol = 0.0 if deflation_tol is None else float(deflation_tol) * np.linalg.norm(a)
    cap = 100 * n if max_sweeps is None else int(max_sweeps)
    w, status = _hqr_eigenvalues(h, cap, abs_tol)
    if status >= 0:
        raise NonConvergenceError(
            f"QR iteration exceeded {cap} sweeps; stalled at index {status}",
            stalled_index=int(status),
        )
    return w, h, q


def eigenvalues(
    A,
    backend: str = "native",
    deflation_tol: float | None = None,
    max_sweeps: int | None = None,
) -> np.ndarray:
    """Eigenvalues only (no vectors), in no particular order."""
    a = _as_square(A)
    if backend == "lapack":
        return np.linalg.eigvals(a)
    if backend != "native":
        raise ValueError(f"unknown backend {backend!r}")
    return _native_eigvals(a, deflation_tol, max_sweeps)[0]


def eigendecompose(
    A,
    tol: float = 1e-8,
    backend: str = "native",
    deflation_tol: float | None = None,
    max_sweeps: int | None = None,
) -> list[EigenPair]:
    """Full eigendecomposition of a dense complex matrix.

    Parameters
    ----------
    A : array_like, shape (n, n)
    tol : float
        Target residual ``||A v - lam v||``.  Vectors that miss it after
        the extra inverse-iteration passes are still returned, with the
        achieved residual recorded.
    backend : {"native", "lapack"}
        ``native`` runs the in-house Hessenberg/QR kernels, ``lapack``
        delegates to :func:`numpy.linalg.eig`.
    deflation_tol : float, optional
        Absolute deflation threshold as a multiple of ``||A||_F``.  The
        default uses the relative ``eps * (|h_kk| + |h_k-1,k-1|)`` test.
    max_sweeps : int, optional
        QR iteration cap (default ``100 n``).
    """
    a = _as_square(A)
    n = a.shape[0]
    if backend == "lapack":
        w, v = np.linalg.eig(a)
    elif backend == "native":
        w, h, q = _native_eigvals(a, deflation_tol, max_sweeps)
        if n == 1:
            v = np.ones((1, 1), dtype=np.complex128)
        else:
            hnorm = float(np.linalg.norm(h))
            v = np.empty((n, n), dtype=np.complex128)
            for i in range(n):
                x = _inverse_iteration(h, w[i], 2, hnorm)
                v[:, i] = q @ x
            v /= np.linalg.norm(v, axis=0)
            res = np.linalg.norm(a @ v - v * w, axis=0)
            for i in np.nonzero(res > tol)[0]:
                x = _inverse_iteration(h, w[i], 5, hnorm)
                y = q @ x
                y /= np.linalg.norm(y)
                if np.linalg.norm(a @ y - w[i] * y) < res[i]:
                    v[:, i] = y
    else:
        raise ValueError(f"unknown backend {backend!r}")
    v = v / np.linalg.norm(v, axis=0)
    res = np.linalg.norm(a @ v - v * w, axis=0)
    return [EigenPair(complex(w[i]), v[:, i].copy(), float(res[i])) for i in range(n)]


def _tie_key(z: complex) -> float:
    # principal argument on [-pi, pi): the negative real axis sorts first
    ang = float(np.angle(z))
    return -np.pi if ang >= np.pi else ang


def solve_quadratic(b: complex, c: complex) -> tuple[complex, complex]:
    """Roots of the monic quadratic ``z**2 + b z + c``.

    The larger root comes from the cancellation-free branch and the
    smaller one from the product ``c``.  Each root gets one Newton step.
    Output order is ``|z1| <= |z2|``; equal moduli are ordered by
    argument in ``[-pi, pi)``.
    """
    b = complex(b)
    c = complex(c)
    if not (np.isfinite(b) and np.isfinite(c)):
        raise ValueError("non-finite quadratic coefficients")
    disc = np.sqrt(b * b - 4.0 * c)
    if (b.conjugate() * disc).real >= 0.0:
        q = -0.5 * (b + disc)
    else:
        q = -0.5 * (b - disc)
    if q == 0:
        roots = [0j, 0j]
    else:
        roots = [q, c / q]
    polished = []
    for z in roots:
        d = 2.0 * z + b
        if d != 0:
            z = z - (z * z + b * z + c) / d
        polished.append(complex(z))
    z1, z2 = polished
    m1, m2 = abs(z1), abs(z2)
    if abs(m1 - m2) <= 1e-14 * max(m1, m2):
        if _tie_key(z2) < _tie_key(z1):
            z1, z2 = z2, z1
    elif m2 < m1:
        z1, z2 = z2, z1
    return z1, z2


def solve_quadratic_batch(b, c) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`solve_quadratic` ordering by modulus only."""
    b = np.asarray(b, dtype=np.complex128)
    c = np.broadcast_to(np.asarray(c, dtype=np.complex128), b.shape)
    disc = np.sqrt(b * b - 4.0 * c)
    sgn = np.where((np.conj(b) * disc).real >= 0.0, 1.0, -1.0)
    q = -0.5 * (b + sgn * disc)
    safe = q != 0
    z1 = q
    z2 = np.where(safe, c / np.where(safe, q, 1.0), 0.0)
    out = []
    for z in (z1, z2):
        d = 2.0 * z + b
        ok = d != 0
        step = np.where(ok, (z * z + b * z + c) / np.where(ok, d, 1.0), 0.0)
        out.append(z - step)
    z1, z2 = out
    swap = np.abs(z2) < np.abs(z1)
    return np.where(swap, z2, z1), np.where(swap, z1, z2)


def order_contour(points, max_slope: float = 1.0) -> list[complex]:
    """Sort points counterclockwise about their centroid.

    The result starts at the point with the smallest argument in
    ``[0, 2 pi)``.  Along a single loop the radius changes slowly between
    angular neighbours; clouds where the typical radial jump exceeds
    ``max_slope`` times the arc step (two interleaved loops, for example)
    are rejected.
    """
    pts = np.asarray(list(points), dtype=np.complex128).ravel()
    if pts.size < 8:
        raise InsufficientSamplingError(f"need at least 8 points, got {pts.size}")
    centre = pts.mean()
    rel = pts - centre
    scale = np.max(np.abs(rel))
    if scale == 0.0 or np.min(np.abs(rel)) <= 1e-12 * scale:
        raise MalformedContourError("centroid lies on the point set")
    ang = np.mod(np.angle(rel), 2 * np.pi)
    order = np.lexsort((np.abs(rel), ang))
    out = pts[order]
    r = np.abs(rel[order])
    dth = np.diff(np.append(ang[order], ang[order][0] + 2 * np.pi))
    jump = np.abs(np.diff(np.append(r, r[0])))
    slope = np.median(jump / np.maximum(r.mean() * dth, 1e-300))
    if slope > max_slope or polygon_winding(out, centre) != 1:
        raise MalformedContourError(
            f"points do not trace a single loop (median radial slope {slope:.3g})"
        )
    return [complex(z) for z in out]


def polygon_winding(points, about: complex) -> int:
    """Winding number of the closed polygon ``points`` about ``about``."""
    z = np.asarray(points, dtype=np.complex128) - about
    ang = np.angle(np.roll(z, -1) / z)
    return int(round(ang.sum() / (2 * np.pi)))
