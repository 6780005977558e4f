"""Spectra of the step operator and quasienergies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tables import write_table
from .numerics import eigendecompose, eigenvalues
from .walk import WalkParams, build_step_operator

# |lambda| floor used when the open-chain operator is singular
LAMBDA_FLOOR = 1e-300


@dataclass(frozen=True)
class SpectrumResult:
    params: WalkParams
    lambdas: np.ndarray
    quasienergies: np.ndarray
    residual_max: float


def quasienergy(lam) -> np.ndarray:
    """E = i Log(lambda) on the principal branch with Re E in (-pi, pi]."""
    lam = np.asarray(lam, dtype=np.complex128)
    mod = np.maximum(np.abs(lam), LAMBDA_FLOOR)
    re = -np.angle(lam)
    re = np.where(re <= -np.pi, np.pi, re)
    return re + 1j * np.log(mod)


def gbc_spectrum(
    p: WalkParams,
    tol: float = 1e-8,
    backend: str = "native",
    residuals: bool = True,
) -> SpectrumResult:
    """Diagonalise the step operator at the boundary weight ``p.delta``.

    With ``residuals=False`` only eigenvalues are computed and
    ``residual_max`` is NaN; sweeps use this to skip the vectors.
    """
    U = build_step_operator(p)
    if residuals:
        pairs = eigendecompose(U, tol=tol, backend=backend)
        lam = np.array([e.value for e in pairs])
        res = max(e.residual for e in pairs)
    else:
        lam = np.asarray(eigenvalues(U, backend=backend))
        res = float("nan")
    return SpectrumResult(p, lam, quasienergy(lam), float(res))


def floquet_gap(s: SpectrumResult | np.ndarray) -> float:
    """Smallest complex distance of any quasienergy to {0, pi, -pi}."""
    E = s.quasienergies if isinstance(s, SpectrumResult) else np.asarray(s)
    if E.size == 0:
        raise ValueError("empty spectrum")
    d = np.minimum(np.abs(E), np.minimum(np.abs(E - np.pi), np.abs(E + np.pi)))
    return float(d.min())


def bloch_quasienergies(p: WalkParams, k) -> tuple[np.ndarray, np.ndarray]:
    """E_+(k), E_-(k) of the ring, from cos E at beta = exp(i k)."""
    c1, s1, c2, s2 = p.coins()
    a = p.alpha
    beta = np.exp(1j * np.asarray(k, dtype=float))
    x = -0.5 * (a + 1 / a) * s1 * s2 + 0.5 * (beta * a + 1 / (beta * a)) * c1 * c2
    e = np.arccos(x.astype(np.complex128))
    return e, -e


def analytic_obc_gap(p: WalkParams, n_k: int = 4001) -> float:
    """Floquet gap of the open-chain continuum, cos E = -A + B cos k."""
    k = np.linspace(0.0, np.pi, n_k)
    c1, s1, c2, s2 = p.coins()
    x = -np.cosh(p.gamma) * s1 * s2 + c1 * c2 * np.cos(k)
    e = np.arccos(x.astype(np.complex128))
    d = np.minimum(np.abs(e), np.abs(e - np.pi))
    return float(d.min())


def hausdorff(a, b) -> float:
    a = np.asarray(a)[:, None]
    b = np.asarray(b)[None, :]
    d = np.abs(a - b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def write_csv(path, results, meta: dict | None = None) -> None:
    rows = (
        (r.params.delta, lam.real, lam.imag, E.real, E.imag)
        for r in results
        for lam, E in zip(r.lambdas, r.quasienergies)
    )
    write_table(path, ["delta", "re_lambda", "im_lambda", "re_E", "im_E"], rows, meta)
