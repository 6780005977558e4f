"""Effective Hamiltonian, biorthogonal band states and the winding number.

The bulk 2x2 problem at spatial mode beta has cos E(beta) given by

    x = -cosh(gamma) s1 s2 + (beta a + 1/(beta a)) c1 c2 / 2,   a = e^gamma

and h = E * g / (2i sin E) with

    g_x = -(beta a - 1/(beta a)) c2
    g_y = -i [(a + 1/a) c1 s2 + (beta a + 1/(beta a)) s1 c2]
    g_z = (a - 1/a) s2

so that h.h = E**2.  Writing hh = h / E, the right and left states are

    R = sqrt(T) / sqrt(2 (1 - hh_z)) * (hh_x - i hh_y, 1 - hh_z)
    L = 1 / sqrt(T) / sqrt(2 (1 - hh_z)) * (hh_x + i hh_y, 1 - hh_z)
    T = sin E (1 - sin 2E hh_y) + conj(sin E) (1 + sin 2E hh_y)

with L.R = 1.  The two bands differ only in the sign of sin E.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    CoalescenceError,
    ExceptionalPointError,
    InsufficientSamplingError,
    SingularInputError,
)
from .gbz import build_contours, crossover_delta
from .spectrum import floquet_gap, gbc_spectrum
from .tables import write_table
from .walk import WalkParams

DELTA_FACTORS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
EP_TOL = 1e-12
SERIES_TOL = 1e-8


@dataclass(frozen=True)
class HComponents:
    hx: complex
    hy: complex
    hz: complex
    E_plus: complex
    E_minus: complex
    beta: complex
    near_singular: bool = False


@dataclass(frozen=True)
class BandStates:
    psiR_plus: np.ndarray
    psiR_minus: np.ndarray
    psiL_plus: np.ndarray
    psiL_minus: np.ndarray


@dataclass
class InvariantResult:
    v_raw_per_delta: dict
    v: float
    v_quantized: Fraction
    converged: bool
    contour_size: int
    v_other: float = float("nan")
    scheme: str = "wilson"
    side: str = "inside"
    L: int = 0
    trace: list = field(default_factory=list)


def default_deltas(p: WalkParams) -> list[float]:
    """Boundary weights scaled to the crossover exp(-|gamma| L)."""
    dc = crossover_delta(p)
    if p.gamma == 0.0:
        dc = 1.0
    return [dc * f for f in DELTA_FACTORS]


def cos_energy(beta, p: WalkParams):
    c1, s1, c2, s2 = p.coins()
    a = p.alpha
    beta = np.asarray(beta, dtype=np.complex128)
    return -np.cosh(p.gamma) * s1 * s2 + 0.5 * (beta * a + 1.0 / (beta * a)) * c1 * c2


def g_vector(beta, p: WalkParams):
    c1, s1, c2, s2 = p.coins()
    a = p.alpha
    beta = np.asarray(beta, dtype=np.complex128)
    ba = beta * a
    gx = -(ba - 1.0 / ba) * c2
    gy = -1j * ((a + 1.0 / a) * c1 * s2 + (ba + 1.0 / ba) * s1 * c2)
    gz = np.full_like(ba, (a - 1.0 / a) * s2)
    return gx, gy, gz


def h_components(beta: complex, p: WalkParams, band: int = 1) -> HComponents:
    """h at one spatial mode; ``band`` = +1 or -1 picks the sign of E_plus."""
    if beta == 0:
        raise SingularInputError("beta = 0")
    x = complex(cos_energy(beta, p))
    E = band * complex(np.arccos(x + 0j))
    s = np.sin(E)
    if abs(s) < EP_TOL:
        raise ExceptionalPointError(f"sin E = {abs(s):.3g} at beta = {beta}")
    near = abs(s) < SERIES_TOL
    if near and abs(E) < 1.0:
        pref = (1.0 + E * E / 6.0) / 2j
    else:
        pref = E / (2j * s)
    gx, gy, gz = (complex(c) for c in g_vector(beta, p))
    return HComponents(pref * gx, pref * gy, pref * gz, E, -E, complex(beta), bool(near))


def band_states(h: HComponents) -> BandStates:
    """Right and left eigenvectors of both bands at one spatial mode."""
    out = []
    for E in (h.E_plus, h.E_minus):
        d = E - h.hz
        if abs(d) < EP_TOL:
            raise CoalescenceError(f"E - h_z = {abs(d):.3g}")
        s = np.sin(E)
        s2 = np.sin(2 * E)
        S = s * (E - s2 * h.hy) + np.conj(s) * (E + s2 * h.hy)
        if abs(S) < EP_TOL:
            raise CoalescenceError("normalisation vanishes")
        den = np.sqrt(2 * d)
        R = np.sqrt(S) / (E * den) * np.array([h.hx - 1j * h.hy, d])
        Lv = 1.0 / np.sqrt(S) / den * np.array([h.hx + 1j * h.hy, d])
        out.append((R, Lv))
    return BandStates(out[0][0], out[1][0], out[0][1], out[1][1])


def _states(beta, sinE, x, p):
    """Vectorised (R, L) of shape (n, 2) for tracked sin E values."""
    if np.any(np.abs(sinE) < EP_TOL):
        raise ExceptionalPointError("contour passes through an exceptional point")
    gx, gy, gz = g_vector(beta, p)
    f = 1.0 / (2j * sinE)
    hx, hy, hz = f * gx, f * gy, f * gz
    one = 1.0 - hz
    if np.any(np.abs(one) < EP_TOL):
        raise CoalescenceError("bands coalesce on the contour")
    s2 = 2.0 * sinE * x
    T = sinE * (1.0 - s2 * hy) + np.conj(sinE) * (1.0 + s2 * hy)
    if np.any(np.abs(T) < EP_TOL):
        raise CoalescenceError("normalisation vanishes on the contour")
    den = np.sqrt(2.0 * one)
    rt = np.sqrt(T)
    R = np.stack([hx - 1j * hy, one], axis=1) * (rt / den)[:, None]
    Lv = np.stack([hx + 1j * hy, one], axis=1) * (1.0 / (rt * den))[:, None]
    return R, Lv


def _tracked_sine(beta, p):
    """sin E along a closed node sequence with continuous sign.

    Returns (sinE, x, closure) where ``closure`` is the sign picked up
    when continuing from the last node back to the first (-1 means the
    two bands exchange around the loop).
    """
    x = cos_energy(beta, p)
    r = np.sqrt(1.0 - x * x)
    step = np.sign(np.real(np.conj(r[:-1]) * r[1:]))
    step[step == 0] = 1.0
    sigma = np.concatenate([[1.0], np.cumprod(step)])
    last = np.sign(np.real(np.conj(r[-1]) * r[0])) or 1.0
    closure = sigma[-1] * last
    return sigma * r, x, closure


def _reduce_pi(phase):
    return phase - np.pi * np.round(phase / np.pi)


def _links(beta, p):
    """Per-band link overlaps L_k . R_{k+1} around the closed sequence."""
    sE, x, closure = _tracked_sine(beta, p)
    nxt_beta = np.roll(beta, -1)
    nxt_x = np.roll(x, -1)
    out = []
    for s in (1.0, -1.0):
        cur = s * sE
        nxt = np.roll(cur, -1)
        nxt[-1] = s * closure * sE[0]
        R0, L0 = _states(beta, cur, x, p)
        R1, _ = _states(nxt_beta, nxt, nxt_x, p)
        out.append(np.einsum("ij,ij->i", L0, R1))
    return out, sE, closure


def _wilson(beta, p):
    (ov_p, ov_m), _, _ = _links(beta, p)
    total = 0j
    for ov in (ov_p, ov_m):
        total += np.sum(-_reduce_pi(np.angle(ov)) + 1j * np.log(np.abs(ov)))
    return total / (2 * np.pi)


def _derivative(beta, p):
    """Midpoint rule for the integral of L . i dR/dt along the contour.

    On each link R' is the central difference (R_{k+1} - R_k) / h and L is
    the link average, so every interval only uses its own end points and
    corners of the contour need no special treatment.
    """
    sE, x, closure = _tracked_sine(beta, p)
    nxt_beta = np.roll(beta, -1)
    total = 0j
    for s in (1.0, -1.0):
        cur = s * sE
        nxt = np.roll(cur, -1)
        nxt[-1] = s * closure * sE[0]
        R, Lv = _states(beta, cur, x, p)
        Rn, Ln = _states(nxt_beta, nxt, np.roll(x, -1), p)
        flip = np.real(np.einsum("ij,ij->i", np.conj(R), Rn)) < 0
        Rn[flip] *= -1
        Ln[flip] *= -1
        Lm = 0.5 * (Lv + Ln)
        total += np.sum(np.einsum("ij,ij->i", Lm, 1j * (Rn - R)))
    return total / (2 * np.pi)


def refine_contour(beta, p, max_phase=0.01, max_passes=24, max_nodes=200_000):
    """Insert log-polar midpoints until every link is well resolved.

    A link is resolved when both band overlaps have phase (mod pi) below
    ``max_phase``, log-modulus below ``max_phase`` and the sin E tracking
    between its ends is unambiguous.  Returns (nodes, n_unresolved).
    """
    beta = np.asarray(beta, dtype=np.complex128)
    bad = np.ones(beta.size, dtype=bool)
    for _ in range(max_passes):
        (ov_p, ov_m), sE, _ = _links(beta, p)
        r = np.roll(sE, -1)
        track = np.abs(np.real(np.conj(sE) * r)) < 0.7 * np.abs(sE) * np.abs(r)
        bad = track.copy()
        for ov in (ov_p, ov_m):
            bad |= np.abs(_reduce_pi(np.angle(ov))) > max_phase
            bad |= np.abs(np.log(np.abs(ov))) > max_phase
        if not bad.any() or beta.size + bad.sum() > max_nodes:
            break
        idx = np.nonzero(bad)[0]
        nxt = np.roll(beta, -1)[idx]
        mids = beta[idx] * np.sqrt(nxt / beta[idx])
        beta = np.insert(beta, idx + 1, mids)
    return beta, int(bad.sum())


def contour_winding(beta, p: WalkParams, refine: bool = True):
    """(v_wilson, v_derivative, n_nodes, n_unresolved) on a closed contour."""
    beta = np.asarray(beta, dtype=np.complex128)
    unresolved = 0
    if refine:
        beta, unresolved = refine_contour(beta, p)
    return _wilson(beta, p), _derivative(beta, p), beta.size, unresolved


def quantize_half(v: float) -> Fraction:
    return Fraction(int(np.round(2 * v)), 2)


def _check_deltas(p, deltas):
    deltas = default_deltas(p) if deltas is None else [float(d) for d in deltas]
    if not deltas or any(d <= 0 for d in deltas) or any(
        b >= a for a, b in zip(deltas, deltas[1:])
    ):
        raise ValueError("deltas must be positive and strictly decreasing")
    return deltas


def _summarise(trace, deltas, scheme, side, L, size):
    key = "wilson" if scheme == "wilson" else "derivative"
    alt = "derivative" if scheme == "wilson" else "wilson"
    raw = {t["delta"]: t[key] for t in trace}
    last = trace[-1]
    v = float(last[key].real)
    other = float(last[alt].real)
    converged = abs(v - other) < 5e-3 and last["unresolved"] == 0
    if len(trace) > 1:
        converged &= abs(last[key].real - trace[-2][key].real) < 1e-3
    return InvariantResult(raw, v, quantize_half(v), bool(converged), size, other,
                           scheme, side, L, trace)


def winding_sides(
    p: WalkParams,
    deltas=None,
    scheme: str = "wilson",
    sides=("inside", "outside"),
    tol: float = 1e-8,
    backend: str = "native",
    _retry: bool = True,
) -> dict:
    """Winding numbers on several contours sharing one set of spectra.

    Returns a dict side -> :class:`InvariantResult`.
    """
    if scheme not in ("wilson", "derivative"):
        raise ValueError(f"unknown scheme {scheme!r}")
    for side in sides:
        if side not in ("inside", "outside"):
            raise ValueError(f"unknown side {side!r}")
    user_deltas = deltas
    deltas = _check_deltas(p, deltas)
    traces = {side: [] for side in sides}
    sizes = {}
    try:
        for d in deltas:
            inside, outside = build_contours(p.replace(delta=d), tol=tol, backend=backend)
            for side in sides:
                c = inside if side == "inside" else outside
                if c.betas.size < 32:
                    raise InsufficientSamplingError(
                        f"contour at delta={d:g} has {c.betas.size} points, need >= 32"
                    )
                w, dv, nodes, unresolved = contour_winding(c.betas, p)
                traces[side].append(
                    {"delta": d, "wilson": w, "derivative": dv, "nodes": nodes,
                     "unresolved": unresolved}
                )
                sizes[side] = c.betas.size
    except ExceptionalPointError:
        if not _retry:
            raise
        # refine once on a doubled lattice, then let errors propagate
        return winding_sides(p.replace(L=2 * p.L), user_deltas, scheme, sides, tol,
                             backend, _retry=False)
    return {
        side: _summarise(traces[side], deltas, scheme, side, p.L, sizes[side])
        for side in sides
    }


def winding_number(
    p: WalkParams,
    deltas=None,
    scheme: str = "wilson",
    side: str = "inside",
    tol: float = 1e-8,
    backend: str = "native",
) -> InvariantResult:
    """Winding number on one GBC contour, taken at the smallest delta.

    Both integration schemes are always evaluated; ``scheme`` selects
    which one is reported as ``v`` and the other is kept in ``v_other``.
    ``converged`` requires the two schemes to agree within 5e-3 and the
    last two deltas to agree within 1e-3.
    """
    return winding_sides(p, deltas, scheme, (side,), tol, backend)[side]


def obc_gap(p: WalkParams, backend: str = "native") -> float:
    """Floquet gap of the open chain (delta = 0)."""
    return floquet_gap(gbc_spectrum(p.replace(delta=0.0), backend=backend, residuals=False))


def write_csv(path, rows, meta: dict | None = None) -> None:
    """rows: iterable of (WalkParams, InvariantResult, gap)."""
    cols = ["theta1", "theta2", "gamma", "v_raw_re", "v_raw_im", "v_quantized", "converged", "gap"]
    body = []
    for p, r, gap in rows:
        vr = r.v_raw_per_delta[min(r.v_raw_per_delta)]
        body.append((p.theta1, p.theta2, p.gamma, vr.real, vr.imag, str(r.v_quantized), r.converged, gap))
    write_table(path, cols, body, meta)
