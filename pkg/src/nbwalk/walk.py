"""Split-step walk operator on a finite chain and its time evolution.

State layout is site-major with the coin index fastest: amplitude index
``2*j + coin`` with coin 0 = down and coin 1 = up.  One step is

    U = T_down' R(theta2) M T_up' R(theta1)

where T_up' moves the up component one site right, T_down' moves the
down component one site left, and the two wrap-around hops (up from the
last site to the first, down from the first site to the last) carry the
weight ``delta``.  delta = 0 is an open chain and delta = 1 a ring.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateStateError, DimensionError, InvalidParamsError

DOWN, UP = 0, 1


@dataclass(frozen=True)
class WalkParams:
    theta1: float
    theta2: float
    gamma: float = 0.0
    delta: float = 0.0
    L: int = 128

    def __post_init__(self):
        vals = (self.theta1, self.theta2, self.gamma, self.delta)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidParamsError(f"non-finite walk parameters {vals}")
        if int(self.L) != self.L or self.L < 4:
            raise InvalidParamsError(f"L must be an integer >= 4, got {self.L}")
        object.__setattr__(self, "L", int(self.L))

    @property
    def alpha(self) -> float:
        return float(np.exp(self.gamma))

    @classmethod
    def from_alpha(cls, theta1, theta2, alpha, delta=0.0, L=128):
        if alpha <= 0:
            raise InvalidParamsError(f"e^gamma must be positive, got {alpha}")
        return cls(theta1, theta2, float(np.log(alpha)), delta, L)

    def replace(self, **changes) -> "WalkParams":
        return replace(self, **changes)

    def coins(self):
        """(c1, s1, c2, s2): half-angle cosines and sines."""
        h1, h2 = 0.5 * self.theta1, 0.5 * self.theta2
        return np.cos(h1), np.sin(h1), np.cos(h2), np.sin(h2)


@dataclass(frozen=True)
class PositionDistribution:
    probs: np.ndarray
    norm_before: float


def apply_step(p: WalkParams, x: np.ndarray) -> np.ndarray:
    """Apply one step to a state (2L,) or a stack of columns (2L, k)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[0] != 2 * p.L:
        raise DimensionError(f"state length {x.shape[0]} does not match 2L = {2 * p.L}")
    c1, s1, c2, s2 = p.coins()
    a = p.alpha
    d, u = x[0::2], x[1::2]
    d, u = c1 * d - s1 * u, s1 * d + c1 * u
    u = np.concatenate([p.delta * u[-1:], u[:-1]])
    d, u = a * d, u / a
    d, u = c2 * d - s2 * u, s2 * d + c2 * u
    d = np.concatenate([d[1:], p.delta * d[:1]])
    out = np.empty_like(x)
    out[0::2] = d
    out[1::2] = u
    return out


def build_step_operator(p: WalkParams) -> np.ndarray:
    """Dense 2L x 2L one-step operator."""
    return apply_step(p, np.eye(2 * p.L, dtype=np.complex128))


def localized_state(L: int, site: int, coin: int = UP) -> np.ndarray:
    psi = np.zeros(2 * L, dtype=np.complex128)
    psi[2 * site + coin] = 1.0
    return psi


def evolve(U: np.ndarray, psi0: np.ndarray, N: int) -> list[np.ndarray]:
    """States ``U^t psi0`` for t = 0..N by repeated multiplication."""
    U = np.asarray(U)
    psi = np.asarray(psi0, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[1] != psi.shape[0]:
        raise DimensionError(f"operator {U.shape} incompatible with state {psi.shape}")
    if N < 0:
        raise InvalidParamsError("step count must be non-negative")
    states = [psi.copy()]
    for _ in range(int(N)):
        psi = U @ psi
        states.append(psi)
    return states


def position_distribution(psi: np.ndarray) -> PositionDistribution:
    psi = np.asarray(psi)
    w = np.abs(psi[0::2]) ** 2 + np.abs(psi[1::2]) ** 2
    norm = float(w.sum())
    if not norm > 0 or not np.isfinite(norm):
        raise DegenerateStateError("state has zero (or non-finite) norm")
    return PositionDistribution(w / norm, norm)


def walk_distribution(p: WalkParams, N: int, start: int | None = None, coin: int = UP):
    """Evolve a localized walker N steps; returns (distribution, start site)."""
    start = p.L // 2 if start is None else start
    U = build_step_operator(p)
    psi = evolve(U, localized_state(p.L, start, coin), N)[-1]
    return position_distribution(psi), start
