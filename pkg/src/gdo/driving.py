"""
Linear part of the invariant for the driven problem.

The drives F, G displace the ladder operator, B = b + beta, where

    beta' + i omega_I / (M g_-) beta = -W(t),
    W = -(sqrt(omega_I / 2g_-) + i g_0 / sqrt(2 omega_I g_-)) G + i sqrt(g_- / 2 omega_I) F,

and the invariant picks up I_T = I + g1 q + g2 p + g3.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._ode import DenseSolution
from ._quad import integrate
from .invariant import InvariantCoefficients
from .schedule import ParameterSchedule

__all__ = ["DriveState", "drive_kernel", "solve_beta", "beta_by_quadrature",
           "check_linear_odes", "comoving_beta0"]

N_CHECK = 512


def drive_kernel(inv: InvariantCoefficients, sched: ParameterSchedule, t):
    """Drive kernel W(t)."""
    t = np.asarray(t, dtype=float)
    a, b = inv.window
    span = b - a
    if np.any(t < a - 1e-12 * span) or np.any(t > b + 1e-12 * span):
        raise ValueError(f"t outside the invariant window [{a}, {b}]")
    gm, g0, _ = inv.coefficients(t)
    wI = inv.omega_I
    return (-(np.sqrt(wI / (2 * gm)) + 1j * g0 / np.sqrt(2 * wI * gm)) * sched.G(t)
            + 1j * np.sqrt(gm / (2 * wI)) * sched.F(t))


def comoving_beta0(inv: InvariantCoefficients, sched: ParameterSchedule = None) -> complex:
    """beta0 for which beta'(t0) = 0, i.e. i W(t0) / Theta'(t0).

    For constant coefficients and a constant force this is the stationary
    (time-independent) displacement.
    """
    sched = inv.sched if sched is None else sched
    t0 = inv.t0
    return complex(1j * drive_kernel(inv, sched, t0) / inv.theta_rate(t0))


@dataclass(frozen=True)
class DriveState:
    """beta(t), the drive kernel and the linear invariant coefficients.

    The dense solution also carries the drive contribution to the phase,
    int_{t0}^t [(beta_R^2 - beta_I^2) omega_I/(M g_-) - sqrt(2 omega_I/g_-) G beta_I],
    which vanishes at t0.
    """

    beta0: complex
    inv: InvariantCoefficients
    sched: ParameterSchedule
    _sol: DenseSolution

    @property
    def window(self):
        return self.inv.window

    def beta(self, t):
        y = self._sol(t)
        return y[0] + 1j * y[1]

    def W(self, t):
        return drive_kernel(self.inv, self.sched, t)

    def drive_phase(self, t):
        return self._sol(t)[2]

    def linear_coefficients(self, t):
        """(g1, g2, g3) at ``t``."""
        t = np.asarray(t, dtype=float)
        beta = self.beta(t)
        gm, g0, _ = self.inv.coefficients(t)
        return _linear_from_beta(beta, gm, g0, self.inv.omega_I)

    def shifts(self, t):
        """Packet shifts (Delta_q, Delta_p)."""
        t = np.asarray(t, dtype=float)
        beta = self.beta(t)
        gm = self.inv.g_minus(t)
        wI = self.inv.omega_I
        return np.sqrt(2 * gm / wI) * beta.real, np.sqrt(2 * wI / gm) * beta.imag

    def to_csv(self, path, times=None):
        """Write t, Re beta, Im beta, g1, g2, g3."""
        times = self.inv.basis.check_grid() if times is None else np.asarray(times, dtype=float)
        beta = self.beta(times)
        g1, g2, g3 = self.linear_coefficients(times)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "re_beta", "im_beta", "g1", "g2", "g3"])
            for row in zip(times, beta.real, beta.imag, g1, g2, g3):
                wr.writerow([repr(float(v)) for v in row])


def _linear_from_beta(beta, gm, g0, wI):
    bR, bI = beta.real, beta.imag
    g2 = wI * bI * np.sqrt(2 * gm / wI)
    g1 = wI * bR * np.sqrt(2 * wI / gm) + g2 * g0 / gm
    g3 = wI * (bR**2 + bI**2)
    return g1, g2, g3


def solve_beta(inv: InvariantCoefficients, sched: ParameterSchedule = None, beta0=0.0,
               rtol: float = 1e-12) -> DriveState:
    """Integrate the displacement equation for beta from beta(t0) = beta0.

    ``beta0`` is a complex number or one of ``"zero"`` / ``"comoving"``
    (see :func:`comoving_beta0`).
    """
    sched = inv.sched if sched is None else sched
    if isinstance(beta0, str):
        if beta0 == "zero":
            beta0 = 0.0
        elif beta0 == "comoving":
            beta0 = comoving_beta0(inv, sched)
        else:
            raise ValueError(f"unknown beta0 choice {beta0!r}")
    beta0 = complex(beta0)
    wI = inv.omega_I

    def rhs(t, y):
        gm, g0, _ = inv.coefficients(t)
        M, F, G = sched.M(t), sched.F(t), sched.G(t)
        rate = wI / (M * gm)
        W = (-(np.sqrt(wI / (2 * gm)) + 1j * g0 / np.sqrt(2 * wI * gm)) * G
             + 1j * np.sqrt(gm / (2 * wI)) * F)
        bR, bI = y[0], y[1]
        # d/dt (bR + i bI) = -i rate (bR + i bI) - W
        return np.array([
            rate * bI - W.real,
            -rate * bR - W.imag,
            (bR**2 - bI**2) * rate - np.sqrt(2 * wI / gm) * G * bI,
        ])

    t_probe = inv.basis.check_grid(64)
    scale = max(abs(beta0), float(np.max(np.abs(drive_kernel(inv, sched, t_probe))
                                        / inv.theta_rate(t_probe))), 1e-3)
    sol = DenseSolution(rhs, inv.t0, [beta0.real, beta0.imag, 0.0], inv.window,
                        rtol=rtol, atol=rtol * 1e-1 * scale)
    return DriveState(beta0=beta0, inv=inv, sched=sched, _sol=sol)


def beta_by_quadrature(ds: DriveState, t, abstol: float = 1e-11):
    """beta(t) = exp(-i Theta(t)) (beta0 - int_{t0}^t W exp(i Theta) dt').

    Independent of the ODE route; used to validate :func:`solve_beta`.
    """
    inv = ds.inv

    def integrand(s):
        return ds.W(s) * np.exp(1j * inv.theta(s))

    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.shape, dtype=complex)
    for i, ti in enumerate(t):
        n_pieces = int(max(4, np.ceil(abs(ti - inv.t0) * inv.theta_rate(ti))))
        acc = integrate(integrand, inv.t0, ti, abstol=abstol, pieces=n_pieces) if ti != inv.t0 else 0.0
        out[i] = np.exp(-1j * inv.theta(ti)) * (ds.beta0 - acc)
    return out


def eqt_rhs(inv: InvariantCoefficients, sched: ParameterSchedule):
    """Right-hand side of the ODE system for (g1, g2, g3)."""

    def rhs(t, g):
        gm, g0, gp = inv.coefficients(t)
        M, Y, w2 = sched.M(t), sched.Y(t), sched.omega_sq(t)
        F, G = sched.F(t), sched.G(t)
        g1, g2, _ = g
        return np.array([
            -Y * g1 + M * w2 * g2 + (G * gp - F * g0),
            -g1 / M + Y * g2 - (F * gm - G * g0),
            G * g1 - F * g2,
        ])

    return rhs


def check_linear_odes(ds: DriveState, inv: InvariantCoefficients = None,
                      sched: ParameterSchedule = None, rtol: float = 1e-12,
                      n: int = N_CHECK) -> float:
    """Integrate the (g1, g2, g3) ODE system from the closed-form values at
    t0 and return the max deviation from the closed forms.

    Each component's deviation is divided by the larger of its maximum
    magnitude over the window and its natural size for a displacement of
    size max|beta| (absolute when beta vanishes).
    """
    inv = ds.inv if inv is None else inv
    sched = ds.sched if sched is None else sched
    t0 = inv.t0
    y0 = np.array(ds.linear_coefficients(np.array([t0]))).ravel()
    t = inv.basis.check_grid(n)
    closed = np.array(ds.linear_coefficients(t))
    scale = np.max(np.abs(closed), axis=1)
    atol = 1e-14 * max(1.0, float(np.max(scale)))
    sol = DenseSolution(eqt_rhs(inv, sched), t0, y0, inv.window, rtol=rtol, atol=atol)
    ode = sol(t)
    # natural size of each coefficient for a displacement of size max|beta|;
    # keeps a component that vanishes identically (g2 for real beta) from
    # being divided by its own roundoff
    b = float(np.max(np.abs(ds.beta(t))))
    gm = inv.g_minus(t)
    wI = inv.omega_I
    natural = (wI * b * float(np.max(np.sqrt(2 * wI / gm))),
               wI * b * float(np.max(np.sqrt(2 * gm / wI))),
               wI * b * b)
    dev = 0.0
    for k in range(3):
        denom = max(scale[k], natural[k])
        denom = denom if denom > 0 else 1.0
        dev = max(dev, float(np.max(np.abs(ode[k] - closed[k])) / denom))
    return dev
