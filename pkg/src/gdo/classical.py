"""
Classical solutions of the equation of motion

    M f'' + M' f' + (M omega^2 - M Y^2 - M' Y - M Y') f = 0

The two independent solutions f1, f2 are kept as dense interpolants; every
later quantity (invariant coefficients, phases, wave functions) is built from
them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._ode import DenseSolution, SolverError
from .schedule import ParameterSchedule

__all__ = ["ClassicalBasis", "solve_classical", "check_periodicity", "SolverError"]

N_CHECK = 512


@dataclass(frozen=True)
class ClassicalBasis:
    """Pair of classical solutions with first derivatives on ``window``."""

    sched: ParameterSchedule
    window: tuple
    tol: float
    init: tuple
    wronskian_ref: complex
    _sol: DenseSolution

    def __call__(self, t):
        """Return (f1, df1, f2, df2) at ``t`` as complex arrays."""
        y = self._sol(t)
        return (y[0] + 1j * y[1], y[2] + 1j * y[3], y[4] + 1j * y[5], y[6] + 1j * y[7])

    def f1(self, t):
        y = self._sol(t)
        return y[0] + 1j * y[1]

    def f2(self, t):
        y = self._sol(t)
        return y[4] + 1j * y[5]

    def wronskian(self, t):
        """Mass-weighted Wronskian M (f1 f2' - f1' f2)."""
        f1, d1, f2, d2 = self(t)
        return self.sched.M(t) * (f1 * d2 - d1 * f2)

    def check_grid(self, n=N_CHECK):
        return np.linspace(self.window[0], self.window[1], n)

    def wronskian_deviation(self, n=N_CHECK):
        """Max relative drift of the mass-weighted Wronskian over the window."""
        w = self.wronskian(self.check_grid(n))
        return float(np.max(np.abs(w - self.wronskian_ref)) / abs(self.wronskian_ref))

    def eom_residual(self, n=N_CHECK, order=8):
        """Integral-form defect of the equation of motion.

        On each interval [t_k, t_k+1] of an ``n``-point grid, compares the
        increments of f and f' with Gauss-Legendre integrals of f' and of
        f'' = -(M'/M) f' - spring f. The defect is divided by the local solution
        scale max(|f|, |f'| dt) so the result is a relative error.
        """
        t = self.check_grid(n)
        x, w = leggauss(order)
        lo, hi = t[:-1], t[1:]
        half = 0.5 * (hi - lo)
        nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
        f1n, d1n, f2n, d2n = self(nodes)
        M, dM = self.sched.M(nodes), self.sched.dM(nodes)
        k = self.sched.spring(nodes)
        f1, d1, f2, d2 = self(t)
        worst = 0.0
        for f, d, fn, dn in ((f1, d1, f1n, d1n), (f2, d2, f2n, d2n)):
            acc = -(dM / M) * dn - k * fn
            int_d = half * (dn @ w)
            int_acc = half * (acc @ w)
            scale = np.maximum(np.max(np.abs(fn), axis=1),
                               np.max(np.abs(dn), axis=1) * 2 * half)
            defect_f = np.abs(np.diff(f) - int_d) / scale
            defect_d = np.abs(np.diff(d) - int_acc) * 2 * half / scale
            worst = max(worst, float(np.max(defect_f)), float(np.max(defect_d)))
        return worst

    def to_csv(self, path, times=None):
        """Write t, Re f1, Im f1, Re f1', Im f1', Re f2, Im f2, Re f2', Im f2'."""
        times = self.check_grid() if times is None else np.asarray(times, dtype=float)
        cols = self(times)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "re_f1", "im_f1", "re_df1", "im_df1",
                         "re_f2", "im_f2", "re_df2", "im_df2"])
            for i, ti in enumerate(times):
                row = [ti]
                for c in cols:
                    row += [c[i].real, c[i].imag]
                wr.writerow([repr(float(v)) for v in row])


def _wkb_init(sched: ParameterSchedule):
    t0 = sched.t0
    damp = 0.5 * float(sched.dM(t0) / sched.M(t0))
    w2 = float(sched.spring(t0)) - damp**2
    if w2 <= 0:
        raise ValueError(
            f"complex_exponential_like initial data need a positive local frequency "
            f"at t0={t0}; got Omega0^2 = {w2:.6g}"
        )
    d = 1j * np.sqrt(w2) - damp
    return ((1.0 + 0j, d), (1.0 + 0j, np.conj(d)))


def solve_classical(sched: ParameterSchedule, window, init="complex_exponential_like",
                    tol: float = 1e-12) -> ClassicalBasis:
    """Integrate two independent solutions of the classical equation of motion.

    Parameters
    ----------
    sched : ParameterSchedule
    window : (float, float)
        Time interval; must contain ``sched.t0``, where the initial data sit.
    init : "complex_exponential_like" or ((f1, df1), (f2, df2))
        Default data are f1(t0) = 1, f1'(t0) = i Omega0 - gamma0 with
        gamma0 = M'/2M and Omega0 the local frequency at t0, and f2 the complex
        conjugate; constant-coefficient problems then give pure exponentials.
    tol : float
        rtol = atol of the embedded 8(5,3) Runge-Kutta integrator.
    """
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-13, 1e-6], got {tol}")
    a, b = float(window[0]), float(window[1])
    if not b > a:
        raise ValueError("window must be a non-empty interval")
    probe = np.linspace(a, b, N_CHECK)
    if np.any(sched.M(probe) <= 0):
        raise ValueError("M(t) <= 0 inside the window")

    if isinstance(init, str):
        if init != "complex_exponential_like":
            raise ValueError(f"unknown initial data {init!r}")
        init = _wkb_init(sched)
    (f1, d1), (f2, d2) = init
    f1, d1, f2, d2 = (complex(v) for v in (f1, d1, f2, d2))
    M0 = float(sched.M(sched.t0))
    wr = M0 * (f1 * d2 - d1 * f2)
    if abs(wr) == 0:
        raise ValueError("initial data are linearly dependent (zero Wronskian)")

    def rhs(t, y):
        M, dM = sched.M(t), sched.dM(t)
        k = sched.spring(t)
        g = dM / M
        return np.array([
            y[2], y[3], -g * y[2] - k * y[0], -g * y[3] - k * y[1],
            y[6], y[7], -g * y[6] - k * y[4], -g * y[7] - k * y[5],
        ])

    y0 = [f1.real, f1.imag, d1.real, d1.imag, f2.real, f2.imag, d2.real, d2.imag]
    sol = DenseSolution(rhs, sched.t0, y0, (a, b), rtol=tol, atol=tol)
    return ClassicalBasis(sched=sched, window=(a, b), tol=tol,
                          init=((f1, d1), (f2, d2)), wronskian_ref=wr, _sol=sol)


def default_c(basis: ClassicalBasis):
    """c1 = c3 = 0 and c2 such that g_-(t0) = 1 / M(t0)."""
    t0 = basis.sched.t0
    p = complex(basis.f1(t0) * basis.f2(t0))
    M0 = float(basis.sched.M(t0))
    c2 = 1.0 / (M0 * p)
    if abs(c2.imag) > 1e-12 * abs(c2):
        raise ValueError("default c-constants need f1(t0) f2(t0) real")
    return (0.0, c2.real, 0.0)


def g_minus_from_basis(basis: ClassicalBasis, t, c):
    c1, c2, c3 = c
    f1, _, f2, _ = basis(t)
    return c1 * f1**2 + c2 * f1 * f2 + c3 * f2**2


def check_periodicity(basis: ClassicalBasis, tau: float, tol: float = 1e-6, c=None,
                      n: int = N_CHECK):
    """Test whether g_- = c1 f1^2 + c2 f1 f2 + c3 f2^2 is tau-periodic.

    Returns ``(periodic, max_deviation)`` where the deviation is
    max |g_-(t + tau) - g_-(t)| / max |g_-| on an ``n``-point grid.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    a, b = basis.window
    if b - a < 2 * tau:
        raise ValueError(f"window of length {b - a:.6g} is shorter than 2 tau = {2 * tau:.6g}")
    c = default_c(basis) if c is None else c
    t = np.linspace(a, b - tau, n)
    g0 = g_minus_from_basis(basis, t, c)
    g1 = g_minus_from_basis(basis, t + tau, c)
    scale = max(np.max(np.abs(g0)), np.max(np.abs(g1)))
    dev = float(np.max(np.abs(g1 - g0)) / scale)
    return dev <= tol, dev
