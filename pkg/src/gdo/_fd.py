"""Fourth-order finite-difference operators on uniform grids.

Shared by the eigen-residual, moment, expectation and Schrodinger-residual
checks so they all apply the same discrete p = -i d/dq.
"""

import numpy as np


def spacing(grid, rtol=1e-9):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 6:
        raise ValueError("grid must be one-dimensional with at least 6 points")
    d = np.diff(grid)
    if np.any(d <= 0):
        raise ValueError("grid must be strictly increasing")
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    if np.max(np.abs(d - h)) > rtol * max(h, np.max(np.abs(grid))):
        raise ValueError("finite-difference operators need a uniform grid")
    return h


def d1(f, h):
    f = np.asarray(f)
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return out


def d2(f, h):
    f = np.asarray(f)
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 16 * f[3:-1] - 30 * f[2:-2] + 16 * f[1:-3] - f[:-4]) / (12 * h**2)
    out[0] = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]) / (12 * h**2)
    out[1] = (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]) / (12 * h**2)
    out[-1] = (45 * f[-1] - 154 * f[-2] + 214 * f[-3] - 156 * f[-4] + 61 * f[-5] - 10 * f[-6]) / (12 * h**2)
    out[-2] = (10 * f[-1] - 15 * f[-2] - 4 * f[-3] + 14 * f[-4] - 6 * f[-5] + f[-6]) / (12 * h**2)
    return out


def apply_quadratic(psi, q, a_pp, a_pq, a_qq, a_q=0.0, a_p=0.0, a_c=0.0):
    """Apply a_pp p^2/2 + a_pq (pq+qp)/2 + a_qq q^2/2 + a_q q + a_p p + a_c
    with p = -i d/dq to samples ``psi`` on the uniform grid ``q``."""
    h = spacing(q)
    dpsi = d1(psi, h)
    out = -0.5 * a_pp * d2(psi, h)
    out = out - 1j * a_pq * (q * dpsi + 0.5 * psi)
    out = out + (0.5 * a_qq * q**2 + a_q * q + a_c) * psi
    out = out - 1j * a_p * dpsi
    return out


def apply_hamiltonian(psi, q, sched, t):
    """H_T(t) psi = -(1/2M) psi'' - iY (q psi' + psi/2) + (M w^2/2) q^2 psi - F q psi + i G psi'."""
    M, Y, w2 = float(sched.M(t)), float(sched.Y(t)), float(sched.omega_sq(t))
    F, G = float(sched.F(t)), float(sched.G(t))
    return apply_quadratic(psi, q, 1.0 / M, Y, M * w2, -F, -G, 0.0)


def inner(a, b, h):
    """Trapezoidal <a|b> on a uniform grid."""
    w = np.full(np.shape(a), h)
    w[0] = w[-1] = 0.5 * h
    return np.sum(w * np.conj(a) * b)


def norm(a, h):
    return float(np.sqrt(inner(a, a, h).real))
