"""Regenerate the reference data in tests/data.

Every value here comes from code paths that share nothing with the
package except WalkParams-style inputs: mpmath arithmetic, the block
formulas of the lattice operator written out entry by entry, closed-form
Bloch dispersions, and a winding-number decomposition evaluated on dense
circles.  Run from the repository root:

    python3 scripts/freeze_oracles.py
"""
from __future__ import annotations

import json
import math
import time
from pathlib import Path

import mpmath as mp
import numpy as np

OUT = Path(__file__).resolve().parents[1] / "tests" / "data"
PI = math.pi


def cx(z):
    return [float(mp.re(z)), float(mp.im(z))]


# ------------------------------------------------------------ eigenvalues


def hessenberg_mp(A):
    n = A.rows
    H = A.copy()
    for k in range(n - 2):
        for i in range(k + 2, n):
            if H[i, k] == 0:
                continue
            if abs(H[k + 1, k]) < abs(H[i, k]):
                H[k + 1, :], H[i, :] = H[i, :], H[k + 1, :]
                H[:, k + 1], H[:, i] = H[:, i], H[:, k + 1]
            m = H[i, k] / H[k + 1, k]
            for j in range(n):
                H[i, j] -= m * H[k + 1, j]
            for r in range(n):
                H[r, k + 1] += m * H[r, i]
    return H


def charpoly_hessenberg(H):
    """Coefficients (highest degree first) of det(zI - H)."""
    n = H.rows
    polys = [[mp.mpc(1)]]

    def padd(a, b):
        m = max(len(a), len(b))
        a = [0] * (m - len(a)) + a
        b = [0] * (m - len(b)) + b
        return [x + y for x, y in zip(a, b)]

    for k in range(1, n + 1):
        p = padd(polys[k - 1] + [0], [-H[k - 1, k - 1] * c for c in polys[k - 1]])
        prod = mp.mpc(1)
        for i in range(k - 1, 0, -1):
            prod *= H[i, i - 1]
            term = [-(H[i - 1, k - 1] * prod) * c for c in polys[i - 1]]
            p = padd(p, term)
        polys.append(p)
    return polys[n]


def eig64_oracle(seed=20240611, n=64):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.random((n, n)))
    a = r * np.exp(2j * np.pi * rng.random((n, n)))
    mp.mp.dps = 60
    A = mp.matrix([[mp.mpc(complex(a[i, j])) for j in range(n)] for i in range(n)])
    coeffs = charpoly_hessenberg(hessenberg_mp(A))
    # companion matrix of the monic polynomial, solved at high precision
    C = mp.matrix(n, n)
    for j in range(n):
        C[0, j] = -coeffs[j + 1]
    for i in range(1, n):
        C[i, i - 1] = 1
    ev = mp.eig(C, left=False, right=False)
    trace = sum(A[i, i] for i in range(n))
    assert abs(sum(ev) - trace) < mp.mpf(10) ** -30
    return {
        "seed": seed,
        "matrix_re": a.real.tolist(),
        "matrix_im": a.imag.tolist(),
        "eigenvalues": [cx(z) for z in ev],
    }


# ------------------------------------------------------ lattice operator


def sm_operator(t1, t2, gamma, delta, L, literal=False):
    """Lattice operator entry by entry from the four coin blocks.

    Block (a, b) maps input coin b to output coin a with 1 = down, 2 = up.
    ``literal=True`` keeps the (1 + delta^2) weight printed for the (L, L)
    entry of the down-down and down-up blocks; the default uses delta^2,
    which is what the factorised step produces.
    """
    c1, s1 = mp.cos(t1 / 2), mp.sin(t1 / 2)
    c2, s2 = mp.cos(t2 / 2), mp.sin(t2 / 2)
    ep, em = mp.exp(gamma), mp.exp(-gamma)

    def d(i, j):
        return 1 if i == j else 0

    def hop_left(i, j):
        return d(i + 1, j) + d(i, L) * d(1, j) * delta

    def hop_right(i, j):
        return d(i, j + 1) + d(i, 1) * d(L, j) * delta

    def onsite(i, j):
        corner = d(i, L) * d(L, j)
        base = d(i, j) if literal else d(i, j) * (1 - corner)
        return base + corner * delta**2

    U = mp.matrix(2 * L, 2 * L)
    for i in range(1, L + 1):
        for j in range(1, L + 1):
            u11 = hop_left(i, j) * ep * c1 * c2 - onsite(i, j) * em * s1 * s2
            u12 = -hop_left(i, j) * ep * s1 * c2 - onsite(i, j) * em * c1 * s2
            u21 = hop_right(i, j) * em * s1 * c2 + d(i, j) * ep * c1 * s2
            u22 = hop_right(i, j) * em * c1 * c2 - d(i, j) * ep * s1 * s2
            r, c = 2 * (i - 1), 2 * (j - 1)
            U[r, c], U[r, c + 1] = u11, u12
            U[r + 1, c], U[r + 1, c + 1] = u21, u22
    return U


def operator_cases():
    mp.mp.dps = 30
    cases = []
    for t1, t2, ga, de, L in [
        (0.6 * PI, 0.58 * PI, math.log(0.82), 0.0, 6),
        (0.6 * PI, 0.58 * PI, math.log(0.82), 0.5, 6),
        (1.3, -0.4, 0.25, 1.0, 5),
        (0.11 * PI, 0.58 * PI, math.log(0.82), 0.37, 4),
    ]:
        out = {"theta1": t1, "theta2": t2, "gamma": ga, "delta": de, "L": L}
        for key, lit in (("product", False), ("literal", True)):
            U = sm_operator(mp.mpf(t1), mp.mpf(t2), mp.mpf(ga), mp.mpf(de), L, lit)
            out[key] = [[cx(U[i, j]) for j in range(2 * L)] for i in range(2 * L)]
        cases.append(out)
    return cases


def walk_cases():
    """N-step states and distributions from repeated mp products."""
    mp.mp.dps = 30
    cases = []
    N = 7
    L = 2 * N + 3
    start = L // 2
    for t1 in (0.11 * PI, 0.56 * PI):
        t2, ga = 0.58 * PI, math.log(0.82)
        U = sm_operator(mp.mpf(t1), mp.mpf(t2), mp.mpf(ga), mp.mpf(0), L)
        psi = mp.matrix(2 * L, 1)
        psi[2 * start + 1] = 1
        for _ in range(N):
            psi = U * psi
        probs = [abs(psi[2 * m]) ** 2 + abs(psi[2 * m + 1]) ** 2 for m in range(L)]
        tot = sum(probs)
        probs = [q / tot for q in probs]
        m01 = sum(abs(m - start) ** mp.mpf("0.1") * q for m, q in enumerate(probs) if m != start)
        cases.append({
            "theta1": t1, "theta2": t2, "gamma": ga, "N": N, "L": L, "start": start,
            "state": [cx(psi[k]) for k in range(2 * L)],
            "probs": [float(q) for q in probs],
            "moment_0.1_normalized": float(m01 / mp.mpf(N) ** mp.mpf("0.1")),
        })
    return cases


# --------------------------------------------------------- Bloch spectrum


def bloch_case(t1=0.6 * PI, t2=0.58 * PI, alpha=0.82, L=64):
    mp.mp.dps = 30
    t1, t2, a = mp.mpf(t1), mp.mpf(t2), mp.mpf(alpha)
    g = mp.log(a)
    c1, s1, c2, s2 = mp.cos(t1 / 2), mp.sin(t1 / 2), mp.cos(t2 / 2), mp.sin(t2 / 2)
    lams = []
    for m in range(L):
        beta = mp.expj(2 * mp.pi * m / L)
        x = -mp.cosh(g) * s1 * s2 + (beta * a + 1 / (beta * a)) / 2 * c1 * c2
        E = mp.acos(x)
        lams += [mp.expj(-E), mp.expj(E)]
    return {"theta1": float(t1), "theta2": float(t2), "alpha": alpha, "L": L,
            "lambdas": [cx(z) for z in lams]}


# --------------------------------------------------- winding decomposition


def _winding(f):
    d = np.angle(np.roll(f, -1) / f)
    return float(np.sum(d) / (2 * np.pi))


def dense_circle_v(t1, t2, gamma, radius, n=200_000):
    """Closed form of the band-summed winding on |beta| = radius.

    With S = sin E, q = -i cos(E) g_y and F = (S(1-q) + conj(S)(1+q))^2,
    the band sum reduces to  [W(g_x + i g_y) - W(g_x - i g_y)]/2 - W(F)/2,
    where W is the counterclockwise winding number about the origin.
    """
    c1, s1, c2, s2 = math.cos(t1 / 2), math.sin(t1 / 2), math.cos(t2 / 2), math.sin(t2 / 2)
    a = math.exp(gamma)
    beta = radius * np.exp(2j * np.pi * np.arange(n) / n)
    ba = beta * a
    x = -math.cosh(gamma) * s1 * s2 + 0.5 * (ba + 1 / ba) * c1 * c2
    gx = -(ba - 1 / ba) * c2
    gy = -1j * ((a + 1 / a) * c1 * s2 + (ba + 1 / ba) * s1 * c2)
    S2 = 1 - x * x
    q = -1j * x * gy
    F = S2 * (1 - q) ** 2 + np.conj(S2) * (1 + q) ** 2 + 2 * np.abs(S2) * (1 - q * q)
    return 0.5 * (_winding(gx + 1j * gy) - _winding(gx - 1j * gy)) - 0.5 * _winding(F)


def winding_cases():
    ga = math.log(0.82)
    r = 1 / 0.82
    eps = 1e-4
    out = []
    for t1 in (0.3, 0.52, 0.6, 0.7, 0.9, 1.1, 1.33, 1.42, 1.7):
        t1r = t1 * PI
        t2r = 0.58 * PI
        out.append({
            "theta1": t1r, "theta2": t2r, "gamma": ga,
            "inside": dense_circle_v(t1r, t2r, ga, r * (1 - eps)),
            "outside": dense_circle_v(t1r, t2r, ga, r * (1 + eps)),
        })
    return out


def sweep_v_case(t2=0.58 * PI, step=0.01, n=101):
    """Inside-contour v along the default theta1 sweep; theta1 = pi is
    nudged off the degenerate point."""
    ga = math.log(0.82)
    r = 1 / 0.82
    t1s = [k * step * PI for k in range(n)]
    vals = [dense_circle_v(t + (1e-9 if abs(math.cos(t / 2)) < 1e-9 else 0.0), t2, ga,
                           r * (1 - 1e-4)) for t in t1s]
    return {"theta2": t2, "gamma": ga, "theta1": t1s, "v": [round(2 * v) / 2 for v in vals]}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    jobs = {
        "operators.json": operator_cases,
        "walks.json": walk_cases,
        "bloch.json": bloch_case,
        "windings.json": winding_cases,
        "sweep_v.json": sweep_v_case,
        "eig64.json": eig64_oracle,
    }
    for name, fn in jobs.items():
        t = time.time()
        data = fn()
        (OUT / name).write_text(json.dumps(data))
        print(f"{name}: {time.time() - t:.1f} s")


if __name__ == "__main__":
    main()
