"""
Quadratic Lewis-Riesenfeld invariant of the undriven oscillator,

    I(t) = g_- p^2/2 + g_0 (pq + qp)/2 + g_+ q^2/2,

with coefficients built from the classical solutions and the phase integral
Theta(t) = int_{t0}^t omega_I / (M g_-) dt'.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._ode import DenseSolution
from ._quad import segment_integrals
from .classical import ClassicalBasis, default_c
from .schedule import ParameterSchedule

__all__ = ["InvariantCoefficients", "build_invariant", "check_invariant_odes", "theta"]

N_CHECK = 512
THETA_ABS_TOL = 1e-11
_GL_X, _GL_W = leggauss(12)


@dataclass(frozen=True)
class InvariantCoefficients:
    """g_-, g_0, g_+ as functions of time, the invariant frequency omega_I
    (fixed at t0) and the cached phase integral Theta."""

    c1: complex
    c2: float
    c3: complex
    omega_I: float
    basis: ClassicalBasis
    _theta_nodes: np.ndarray = field(repr=False)
    _theta_values: np.ndarray = field(repr=False)

    @property
    def sched(self) -> ParameterSchedule:
        return self.basis.sched

    @property
    def window(self):
        return self.basis.window

    @property
    def t0(self):
        return self.basis.sched.t0

    def coefficients(self, t):
        """(g_-, g_0, g_+) at ``t``."""
        return _g_from_basis(self.basis, t, (self.c1, self.c2, self.c3))

    def g_minus(self, t):
        return self.coefficients(t)[0]

    def g_zero(self, t):
        return self.coefficients(t)[1]

    def g_plus(self, t):
        return self.coefficients(t)[2]

    def theta_rate(self, t):
        """omega_I / (M g_-), the instantaneous rate of Theta."""
        return self.omega_I / (self.sched.M(t) * self.g_minus(t))

    def theta(self, t):
        """Theta(t) with Theta(t0) = 0; see :func:`theta`."""
        return theta(self, t)

    def omega_I_deviation(self, n=N_CHECK):
        """max |g_+ g_- - g_0^2 - omega_I^2| / omega_I^2 on the check grid."""
        t = self.basis.check_grid(n)
        gm, g0, gp = self.coefficients(t)
        return float(np.max(np.abs(gp * gm - g0**2 - self.omega_I**2)) / self.omega_I**2)

    def to_csv(self, path, times=None):
        """Write t, g_-, g_0, g_+, Theta."""
        times = self.basis.check_grid() if times is None else np.asarray(times, dtype=float)
        gm, g0, gp = self.coefficients(times)
        th = self.theta(times)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "g_minus", "g_zero", "g_plus", "Theta"])
            for row in zip(times, gm, g0, gp, th):
                wr.writerow([repr(float(v)) for v in row])


def _g_from_basis(basis, t, c, imag_tol=None):
    t = np.asarray(t, dtype=float)
    c1, c2, c3 = c
    sched = basis.sched
    f1, d1, f2, d2 = basis(t)
    M, Y = sched.M(t), sched.Y(t)
    gm = c1 * f1**2 + c2 * f1 * f2 + c3 * f2**2
    s10 = c1 * f1 * d1 + 0.5 * c2 * (d1 * f2 + f1 * d2) + c3 * f2 * d2
    s11 = c1 * d1**2 + c2 * d1 * d2 + c3 * d2**2
    g0 = -M * s10 + M * Y * gm
    # (f -> alpha f, M -> M / alpha^2 with alpha = exp(-int Y)) maps this
    # problem onto the Y = 0 one; undoing the map gives the Y^2 term with
    # the factor M^2 and a minus sign.
    gp = M**2 * s11 + 2 * M * Y * g0 - M**2 * Y**2 * gm
    if imag_tol is not None:
        scale = np.abs(gm) + np.abs(g0) + np.abs(gp)
        worst = np.max((np.abs(gm.imag) + np.abs(g0.imag) + np.abs(gp.imag)) / scale)
        if worst > imag_tol:
            raise ValueError(
                f"c-constants give complex invariant coefficients (relative imaginary part "
                f"{worst:.3g}); for a conjugate-pair basis use c3 = conj(c1) and real c2"
            )
    return gm.real, g0.real, gp.real


def build_invariant(basis: ClassicalBasis, sched: ParameterSchedule = None, c=None,
                    theta_segments: int = None) -> InvariantCoefficients:
    """Invariant coefficients from the classical basis.

    Parameters
    ----------
    basis : ClassicalBasis
    sched : ParameterSchedule, optional
        Must be the schedule the basis was solved for (default).
    c : (c1, c2, c3), optional
        Constants of the quadratic form; default c1 = c3 = 0 with c2 chosen so
        that g_-(t0) = 1/M(t0).
    theta_segments : int, optional
        Number of cached segments for Theta; by default about two per radian
        of phase.
    """
    if sched is not None and sched is not basis.sched:
        raise ValueError("schedule does not match the one the basis was solved for")
    c = default_c(basis) if c is None else c
    c1, c2, c3 = complex(c[0]), complex(c[1]), complex(c[2])
    if abs(c2.imag) > 1e-14 * max(abs(c2), 1.0):
        raise ValueError("c2 must be real")
    c2 = c2.real
    t_chk = basis.check_grid(N_CHECK)
    gm, g0, gp = _g_from_basis(basis, t_chk, (c1, c2, c3), imag_tol=1e-8)
    if np.any(gm <= 0):
        i = int(np.argmax(gm <= 0))
        raise ValueError(f"g_-(t) <= 0 at t = {t_chk[i]:.6g}")
    t0 = basis.sched.t0
    gm0, g00, gp0 = _g_from_basis(basis, np.array([t0]), (c1, c2, c3))
    w2 = float(gp0[0] * gm0[0] - g00[0] ** 2)
    if w2 <= 0:
        raise ValueError(f"omega_I^2 = {w2:.6g} <= 0")
    omega_I = float(np.sqrt(w2))

    a, b = basis.window
    M = basis.sched.M(t_chk)
    rate_max = float(np.max(omega_I / (M * gm)))
    if theta_segments is None:
        theta_segments = int(min(20000, max(64, np.ceil(2 * rate_max * (b - a)))))
    nodes = np.union1d(np.linspace(a, b, theta_segments + 1), [t0])
    inv = InvariantCoefficients(c1=c1, c2=c2, c3=c3, omega_I=omega_I, basis=basis,
                                _theta_nodes=nodes, _theta_values=np.zeros_like(nodes))
    # adaptive Gauss-Kronrod segment sums, accumulated outward from t0
    seg = segment_integrals(inv.theta_rate, nodes, THETA_ABS_TOL * 0.1).real
    k0 = int(np.searchsorted(nodes, t0))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    inv._theta_values[:] = cum - cum[k0]
    return inv


def theta(inv: InvariantCoefficients, t):
    """Theta(t) = int_{t0}^t omega_I / (M g_-) dt'.

    Uses the cached segment sums plus a 12-point Gauss-Legendre rule from the
    nearest cached node, which is exact to rounding on the short remainder.
    """
    t = np.asarray(t, dtype=float)
    a, b = inv.window
    span = b - a
    if np.any(t < a - 1e-12 * span) or np.any(t > b + 1e-12 * span):
        raise ValueError(f"t outside the invariant window [{a}, {b}]")
    flat = np.clip(np.atleast_1d(t).ravel(), a, b)
    nodes = inv._theta_nodes
    k = np.clip(np.searchsorted(nodes, flat) - 1, 0, nodes.size - 2)
    near_right = (flat - nodes[k]) > (nodes[k + 1] - flat)
    k = k + near_right
    start = nodes[k]
    half = 0.5 * (flat - start)
    pts = (start + half)[:, None] + half[:, None] * _GL_X[None, :]
    out = inv._theta_values[k] + half * (inv.theta_rate(pts) @ _GL_W)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def eqo_rhs(sched: ParameterSchedule):
    """Right-hand side of the linear system satisfied by (g_-, g_0, g_+)."""

    def rhs(t, g):
        M, Y, w2 = sched.M(t), sched.Y(t), sched.omega_sq(t)
        gm, g0, gp = g
        return np.array([
            2 * gm * Y - 2 * g0 / M,
            M * w2 * gm - gp / M,
            -2 * gp * Y + 2 * M * w2 * g0,
        ])

    return rhs


def check_invariant_odes(inv: InvariantCoefficients, sched: ParameterSchedule = None,
                         rtol: float = 1e-12, n: int = N_CHECK) -> float:
    """Integrate the (g_-, g_0, g_+) ODE system from the closed-form values
    at t0 and return the max deviation from the closed forms.

    Deviations are relative per component: |dg_-|/g_-, |dg_0|/(|g_0| + omega_I)
    and |dg_+|/g_+, maximised over an ``n``-point grid of the window.
    """
    sched = inv.sched if sched is None else sched
    t0 = inv.t0
    y0 = np.array(inv.coefficients(np.array([t0]))).ravel()
    sol = DenseSolution(eqo_rhs(sched), t0, y0, inv.window, rtol=rtol, atol=1e-14)
    t = inv.basis.check_grid(n)
    ode = sol(t)
    gm, g0, gp = inv.coefficients(t)
    dev = max(
        np.max(np.abs(ode[0] - gm) / np.abs(gm)),
        np.max(np.abs(ode[1] - g0) / (np.abs(g0) + inv.omega_I)),
        np.max(np.abs(ode[2] - gp) / np.abs(gp)),
    )
    return float(dev)
