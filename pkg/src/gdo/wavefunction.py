"""
Exact Schrodinger wave functions of the driven quadratic oscillator.

The eigenfunctions of the invariant are

    phi_n(q, t) = (2^n n!)^(-1/2) (omega_I / pi g_-)^(1/4)
                  exp(-i g_0 q^2 / 2g_- - i Delta_p q - omega_I (q + Delta_q)^2 / 2g_-)
                  H_n(sqrt(omega_I / g_-) (q + Delta_q))

and psi_n = exp(i alpha_n) phi_n solves the time-dependent equation, with
alpha_n(t0) = 0 fixing the gauge.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _fd
from .driving import DriveState
from .invariant import InvariantCoefficients

__all__ = [
    "WaveFunctionSample",
    "hermite",
    "alpha_phase",
    "eval_phi",
    "eval_psi",
    "default_grid",
    "eigen_residual",
    "moments",
    "exact_moments",
    "schrodinger_residual",
]

N_MAX = 64
MIN_POINTS_PER_SIGMA = 16
DEFAULT_POINTS = 2048
DEFAULT_HALF_WIDTH = 8.0


@dataclass(frozen=True)
class WaveFunctionSample:
    n: int
    t: float
    grid: np.ndarray
    psi: np.ndarray
    alpha_n: float
    delta_q: float
    delta_p: float

    @property
    def spacing(self):
        return _fd.spacing(self.grid)

    def norm(self):
        """Trapezoidal integral of |psi|^2."""
        return _fd.inner(self.psi, self.psi, self.spacing).real

    def to_csv(self, path, scenario=""):
        """Write q, Re psi, Im psi, |psi|^2 with a commented header line."""
        with open(path, "w", newline="") as fh:
            fh.write(f"# n={self.n} t={self.t!r} scenario={scenario}\n")
            wr = csv.writer(fh)
            wr.writerow(["q", "re_psi", "im_psi", "abs_psi_sq"])
            for q, p in zip(self.grid, self.psi):
                wr.writerow([repr(float(q)), repr(float(p.real)), repr(float(p.imag)),
                             repr(float(abs(p) ** 2))])


def _check_n(n):
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= N_MAX):
        raise ValueError(f"quantum number must be an integer in [0, {N_MAX}], got {n!r}")
    return int(n)


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by three-term recurrence."""
    n = _check_n(n)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if x.ndim else float(h_prev)
    h = 2 * x
    for k in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * k * h_prev
    return h if x.ndim else float(h)


def alpha_phase(n: int, inv: InvariantCoefficients, ds: DriveState, sched=None, t=None):
    """alpha_n(t) = -(n + 1/2) Theta(t) + drive phase, zero at t0.

    The drive phase is int_{t0}^t [(beta_R^2 - beta_I^2) omega_I/(M g_-)
    - sqrt(2 omega_I/g_-) G beta_I] dt', integrated along with beta.
    """
    n = _check_n(n)
    if t is None:
        raise TypeError("alpha_phase needs a time t")
    return -(n + 0.5) * inv.theta(t) + ds.drive_phase(t)


def _packet(inv, ds, t):
    t = float(t)
    gm, g0, _ = (float(v) for v in inv.coefficients(t))
    dq, dp = (float(v) for v in ds.shifts(t))
    return gm, g0, dq, dp


def default_grid(inv: InvariantCoefficients, ds: DriveState, t: float, n: int = 0,
                 points: int = DEFAULT_POINTS, half_width: float = DEFAULT_HALF_WIDTH):
    """Uniform grid centred on the packet centre -Delta_q.

    The half width is ``half_width`` packet widths sqrt(g_-/omega_I), widened
    for high n so that the classical turning points sqrt(2n+1) sit well
    inside the grid.
    """
    gm, _, dq, _ = _packet(inv, ds, t)
    sigma = math.sqrt(gm / inv.omega_I)
    width = max(half_width, math.sqrt(2 * n + 1) + 6.0) * sigma
    return np.linspace(-dq - width, -dq + width, points)


def eval_phi(n: int, inv: InvariantCoefficients, ds: DriveState, t: float, grid):
    """Invariant eigenfunction phi_n(q, t) on ``grid`` (no dynamical phase)."""
    n = _check_n(n)
    q = np.asarray(grid, dtype=float)
    gm, g0, dq, dp = _packet(inv, ds, t)
    wI = inv.omega_I
    x = math.sqrt(wI / gm) * (q + dq)
    log_norm = -0.5 * (n * math.log(2.0) + math.lgamma(n + 1)) + 0.25 * math.log(wI / (math.pi * gm))
    phase = -0.5 * g0 / gm * q**2 - dp * q
    return math.exp(log_norm) * np.exp(1j * phase - 0.5 * x**2) * hermite(n, x)


def _check_resolution(inv, t, q):
    h = _fd.spacing(q)
    gm = float(inv.g_minus(t))
    sigma = math.sqrt(gm / inv.omega_I)
    if sigma / h < MIN_POINTS_PER_SIGMA:
        raise ValueError(
            f"grid too coarse: {sigma / h:.1f} points per packet width, "
            f"need at least {MIN_POINTS_PER_SIGMA}"
        )
    return h


def eval_psi(n: int, inv: InvariantCoefficients, ds: DriveState, sched=None, t: float = None,
             grid=None) -> WaveFunctionSample:
    """Schrodinger wave function psi_n(q, t) = exp(i alpha_n(t)) phi_n(q, t)."""
    n = _check_n(n)
    if t is None:
        raise TypeError("eval_psi needs a time t")
    t = float(t)
    q = default_grid(inv, ds, t, n) if grid is None else np.asarray(grid, dtype=float)
    _check_resolution(inv, t, q)
    alpha = float(alpha_phase(n, inv, ds, t=t))
    psi = np.exp(1j * alpha) * eval_phi(n, inv, ds, t, q)
    dq, dp = (float(v) for v in ds.shifts(t))
    return WaveFunctionSample(n=n, t=t, grid=q, psi=psi, alpha_n=alpha, delta_q=dq, delta_p=dp)


def apply_invariant(psi, q, inv, ds, t):
    """I_T(t) applied to samples on a uniform grid by finite differences."""
    gm, g0, gp = (float(v) for v in inv.coefficients(t))
    g1, g2, g3 = (float(v) for v in ds.linear_coefficients(t))
    return _fd.apply_quadratic(psi, q, gm, g0, gp, g1, g2, g3)


def eigen_residual(n: int, inv: InvariantCoefficients, ds: DriveState, sched=None,
                   t: float = None, grid=None) -> float:
    """||I_T phi_n - omega_I (n + 1/2) phi_n|| / ||phi_n|| on the grid."""
    n = _check_n(n)
    t = float(t)
    q = default_grid(inv, ds, t, n) if grid is None else np.asarray(grid, dtype=float)
    h = _check_resolution(inv, t, q)
    phi = eval_phi(n, inv, ds, t, q)
    r = apply_invariant(phi, q, inv, ds, t) - inv.omega_I * (n + 0.5) * phi
    return _fd.norm(r, h) / _fd.norm(phi, h)


def moments(sample: WaveFunctionSample, sched=None, inv=None, norm_tol: float = 1e-6):
    """(mean_q, var_q, mean_p, var_p) of a sample from grid quadrature.

    Momentum moments use the fourth-order finite-difference derivative.
    """
    psi, q = sample.psi, sample.grid
    h = sample.spacing
    nrm = _fd.inner(psi, psi, h).real
    if abs(nrm - 1) > norm_tol:
        raise ValueError(f"sample is not normalized (norm = {nrm:.10g})")
    rho = np.abs(psi) ** 2
    w = np.full(q.shape, h)
    w[0] = w[-1] = 0.5 * h
    mean_q = float(np.sum(w * rho * q)) / nrm
    var_q = float(np.sum(w * rho * (q - mean_q) ** 2)) / nrm
    dpsi = _fd.d1(psi, h)
    mean_p = float((_fd.inner(psi, -1j * dpsi, h)).real) / nrm
    # <p^2> = int |psi'|^2 for a packet vanishing at the grid ends
    p2 = float(np.sum(w * np.abs(dpsi) ** 2)) / nrm
    return mean_q, var_q, mean_p, p2 - mean_p**2


def exact_moments(n: int, inv: InvariantCoefficients, ds: DriveState, t: float):
    """Closed-form (mean_q, var_q, mean_p, var_p) for the state n at t."""
    gm, g0, dq, dp = _packet(inv, ds, t)
    wI = inv.omega_I
    var_q = (2 * n + 1) * gm / (2 * wI)
    var_p = (2 * n + 1) * wI / (2 * gm) * (1 + g0**2 / wI**2)
    return -dq, var_q, g0 / gm * dq - dp, var_p


def schrodinger_residual(n: int, inv: InvariantCoefficients, ds: DriveState, t: float,
                         grid=None, dt: float = None) -> float:
    """||i d/dt psi_n - H_T psi_n|| / ||psi_n|| at time t on a fixed grid."""
    from .oracle import schrodinger_residual as _residual

    n = _check_n(n)
    t = float(t)
    q = default_grid(inv, ds, t, n) if grid is None else np.asarray(grid, dtype=float)
    _check_resolution(inv, t, q)
    if dt is None:
        dt = 0.05 / float(inv.theta_rate(t)) / (n + 1)
    psi = lambda s: eval_psi(n, inv, ds, t=s, grid=q).psi  # noqa: E731
    return _residual(psi, inv.sched, t, q, dt)
