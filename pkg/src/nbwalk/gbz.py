"""Spatial-mode roots and generalized Brillouin zone contours.

For a quasienergy E the two spatial modes beta solve

    beta**2 + b beta + alpha**-2 = 0,
    b = -2 (cos E + cosh(gamma) s1 s2) / (alpha c1 c2),

with c_i = cos(theta_i / 2) and s_i = sin(theta_i / 2).  Their product
is fixed at alpha**-2, so the open-chain condition |beta1| = |beta2|
puts both on the circle of radius 1/alpha.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDispersionError, SingularInputError
from .numerics import order_contour, solve_quadratic, solve_quadratic_batch
from .spectrum import gbc_spectrum
from .tables import write_table
from .walk import WalkParams

DEGENERACY_EPS = 1e-9
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class GbzContour:
    betas: np.ndarray
    side: str
    delta: float
    radius_fit: float
    radius_spread: float
    obc_deviation: float = float("nan")
    n_dropped: int = 0


def obc_radius(p: WalkParams) -> float:
    return float(np.exp(-p.gamma))


def quadratic_coefficients(E, p: WalkParams):
    c1, s1, c2, s2 = p.coins()
    lead = p.alpha * c1 * c2
    if abs(c1 * c2) < 1e-12:
        raise DegenerateDispersionError(
            "cos(theta1/2) cos(theta2/2) vanishes; perturb the angle by "
            f"{DEGENERACY_EPS:g} and retry"
        )
    b = -2.0 * (np.cos(E) + np.cosh(p.gamma) * s1 * s2) / lead
    return b, p.alpha ** -2


def beta_roots(E: complex, p: WalkParams) -> tuple[complex, complex]:
    """Both roots for one quasienergy, ordered by modulus."""
    b, c = quadratic_coefficients(complex(E), p)
    return solve_quadratic(b, c)


def beta_roots_from_lambda(lam, p: WalkParams):
    """Vectorised roots for eigenvalues lambda = exp(-iE).

    Uses cos E = (lambda + 1/lambda) / 2 directly, avoiding the logarithm.
    """
    lam = np.asarray(lam, dtype=np.complex128)
    cosE = 0.5 * (lam + 1.0 / lam)
    c1, s1, c2, s2 = p.coins()
    if abs(c1 * c2) < 1e-12:
        raise DegenerateDispersionError(
            "cos(theta1/2) cos(theta2/2) vanishes; perturb the angle by "
            f"{DEGENERACY_EPS:g} and retry"
        )
    b = -2.0 * (cosE + np.cosh(p.gamma) * s1 * s2) / (p.alpha * c1 * c2)
    return solve_quadratic_batch(b, p.alpha ** -2)


def _coin(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def transfer_blocks(p: WalkParams):
    """(A_m, A_p, A_s) such that the bulk condition reads
    det(A_m beta + A_p / beta + A_s - lambda) = 0."""
    Pd = np.diag([1.0, 0.0]).astype(np.complex128)
    Pu = np.diag([0.0, 1.0]).astype(np.complex128)
    R1, R2 = _coin(p.theta1), _coin(p.theta2)
    M = np.diag([p.alpha, 1.0 / p.alpha]).astype(np.complex128)
    Fm, Fs = Pd @ R2, Pu @ R2
    Gs, Gp = Pd @ R1, Pu @ R1
    Am = Fm @ M @ Gs
    Ap = Fs @ M @ Gp
    As = Fs @ M @ Gs + Fm @ M @ Gp
    return Am, Ap, As


def bloch_block(beta: complex, p: WalkParams) -> np.ndarray:
    Am, Ap, As = transfer_blocks(p)
    return Am * beta + Ap / beta + As


def transfer_block_check(E: complex, beta: complex, p: WalkParams) -> float:
    """|det(A_m beta + A_p/beta + A_s - exp(-iE))|."""
    if beta == 0:
        raise SingularInputError("beta = 0")
    blk = bloch_block(complex(beta), p) - np.exp(-1j * complex(E)) * np.eye(2)
    return float(abs(np.linalg.det(blk)))


def obc_circle(p: WalkParams, n_points: int = 128) -> GbzContour:
    if n_points < 8:
        raise ValueError("n_points must be >= 8")
    r = obc_radius(p)
    betas = r * np.exp(2j * np.pi * np.arange(n_points) / n_points)
    return GbzContour(betas, "obc", 0.0, r, 0.0, 0.0)


def _continuum_mask(betas, L, factor):
    """Drop isolated roots (edge modes, the singular eigenvalue) whose
    log-modulus is far from the bulk of the loop."""
    lr = np.log(np.abs(betas))
    med = np.median(lr)
    dev = np.abs(lr - med)
    mad = np.median(dev)
    return dev <= max(factor * mad, 2.0 / L)


def _dedupe(betas, rtol=1e-10):
    if betas.size == 0:
        return betas
    scale = np.max(np.abs(betas))
    keep = []
    for z in betas[np.argsort(np.angle(betas))]:
        if all(abs(z - w) > rtol * scale for w in keep[-4:]):
            keep.append(z)
    return np.array(keep)


def make_contour(betas, side, delta, r_obc, n_dropped=0) -> GbzContour:
    ordered = np.array(order_contour(betas))
    mods = np.abs(ordered)
    r_fit = float(mods.mean())
    return GbzContour(
        ordered,
        side,
        float(delta),
        r_fit,
        float(np.max(np.abs(mods - r_fit))),
        float(np.max(np.abs(mods - r_obc))),
        int(n_dropped),
    )


def contour_points(
    p: WalkParams,
    tol: float = 1e-8,
    backend: str = "native",
    outlier_factor: float = 10.0,
):
    """Raw (inside, outside, n_dropped) root sets before ordering.

    Each eigenvalue contributes its smaller root to the inside set and
    its larger root to the outside set.  Roots of equal modulus lie on
    the open-chain circle and are shared by both sets.
    """
    if p.delta <= 0:
        raise ValueError("build_contours needs delta > 0; use obc_circle for delta = 0")
    spec = gbc_spectrum(p, tol=tol, backend=backend, residuals=False)
    lam = spec.lambdas[np.abs(spec.lambdas) > 1e-200]
    b1, b2 = beta_roots_from_lambda(lam, p)
    m1, m2 = np.abs(b1), np.abs(b2)
    tie = np.abs(m2 - m1) <= TIE_RTOL * m2
    inside = np.concatenate([b1, b2[tie]])
    outside = np.concatenate([b2, b1[tie]])
    out = []
    dropped = 0
    for pts in (inside, outside):
        keep = _continuum_mask(pts, p.L, outlier_factor)
        dropped += int((~keep).sum())
        out.append(_dedupe(pts[keep]))
    return out[0], out[1], dropped + (spec.lambdas.size - lam.size)


def build_contours(
    p: WalkParams,
    tol: float = 1e-8,
    backend: str = "native",
    outlier_factor: float = 10.0,
) -> tuple[GbzContour, GbzContour]:
    inside, outside, dropped = contour_points(p, tol, backend, outlier_factor)
    r = obc_radius(p)
    return (
        make_contour(inside, "inside", p.delta, r, dropped),
        make_contour(outside, "outside", p.delta, r, dropped),
    )


def crossover_delta(p: WalkParams) -> float:
    """Boundary weight below which the inside loop reaches the open-chain
    circle, exp(-|gamma| L)."""
    return float(np.exp(-abs(p.gamma) * p.L))


def write_csv(path, contours, meta: dict | None = None) -> None:
    rows = (
        (c.delta, c.side, b.real, b.imag, abs(b)) for c in contours for b in c.betas
    )
    write_table(path, ["delta", "side", "re_beta", "im_beta", "abs_beta"], rows, meta)
