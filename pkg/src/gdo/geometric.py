"""
Cyclic initial states and the nonadiabatic Berry phase.

beta(t) is tau-periodic, and then every invariant eigenstate is cyclic, when

    theta_0 = int_t^{t+tau} omega_I / (M g_-) dt'  is a multiple of 2 pi, and
    sigma_0 = int_t^{t+tau} W exp(i Theta) dt'     vanishes.

The Berry phase of a cyclic state is computed twice: from the closed
quadrature in g's, h's and beta, and as chi_n + int <psi_n|H_T|psi_n> dt
with the expectation taken on a grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _fd
from ._quad import integrate
from .classical import check_periodicity
from .driving import DriveState
from .invariant import InvariantCoefficients
from .schedule import ParameterSchedule
from .wavefunction import alpha_phase, default_grid, eval_psi

__all__ = [
    "CyclicReport",
    "QuadraticFormCoefficients",
    "BerryPhase",
    "NotCyclicError",
    "cis_conditions",
    "find_cis",
    "h_coefficients",
    "berry_phase",
    "energy_expectation",
]

TOL_THETA = 1e-6 * 2 * math.pi
TOL_SIGMA_REL = 1e-8
TOL_SCHEDULE = 1e-9
TOL_G_MINUS = 1e-6
QUAD_ABSTOL = 1e-12


class NotCyclicError(ValueError):
    pass


@dataclass
class CyclicReport:
    tau: float
    t_start: float
    theta0: float
    sigma0: complex
    is_cis: bool
    winding: int
    tol_theta: float
    tol_sigma: float
    reasons: tuple = ()
    per_n: list = field(default_factory=list)

    def to_dict(self):
        return {
            "tau": self.tau,
            "t_start": self.t_start,
            "theta0": self.theta0,
            "sigma0": [self.sigma0.real, self.sigma0.imag],
            "is_cis": self.is_cis,
            "winding": self.winding,
            "tolerances": {"theta": self.tol_theta, "sigma": self.tol_sigma},
            "reasons": list(self.reasons),
            "per_n": [dict(p) for p in self.per_n],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class QuadraticFormCoefficients:
    """h_0, h_+-, and (when beta is known) xi, zeta sampled at ``t``.

    In the displaced ladder operators the Hamiltonian reads
    h_0 (B^dag B + 1/2)/2 + h_+ B^dag^2/2 + h_- B^2/2 + linear terms.
    """

    t: np.ndarray
    h0: np.ndarray
    h_plus: np.ndarray
    h_minus: np.ndarray
    xi: np.ndarray | None = None
    zeta: np.ndarray | None = None


@dataclass(frozen=True)
class BerryPhase:
    n: int
    tau: float
    t_start: float
    gamma: float
    gamma_reconstructed: float
    chi: float
    discrepancy: float
    partials: dict

    def __float__(self):
        return self.gamma

    def as_row(self):
        return {"n": self.n, "chi": self.chi, "gamma_bp": self.gamma,
                "gamma_reconstructed": self.gamma_reconstructed,
                "discrepancy": self.discrepancy}


def _schedule_periodic(sched, tau, t_start, n=256):
    t = np.linspace(t_start, t_start + tau, n)
    bad = []
    for label in ("M", "Y", "omega_sq", "F", "G"):
        f = getattr(sched, label)
        x0, x1 = f(t), f(t + tau)
        if np.any(np.abs(x1 - x0) > TOL_SCHEDULE * (1 + np.abs(x0))):
            bad.append(label)
    return bad


def cis_conditions(inv: InvariantCoefficients, ds: DriveState, sched: ParameterSchedule = None,
                   tau: float = None, t_start: float = None) -> CyclicReport:
    """theta_0, sigma_0 and the cyclic-state verdict for period ``tau``.

    The invariant window must contain [t_start, t_start + 2 tau] so that
    g_- can be compared over a full period.  The verdict is forced false,
    with a reason, when the schedule or g_- is not tau-periodic or the
    schedule carries an ``irrational`` frequency-ratio flag.
    """
    sched = inv.sched if sched is None else sched
    if tau is None or not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    tau = float(tau)
    a, b = inv.window
    t_start = a if t_start is None else float(t_start)
    if t_start < a or t_start + tau > b * (1 + 1e-14) + 1e-14:
        raise ValueError(f"[{t_start}, {t_start + tau}] is not inside the window [{a}, {b}]")

    reasons = []
    if sched.meta.get("irrational", False):
        reasons.append("frequency ratio flagged irrational")
    bad = _schedule_periodic(sched, tau, t_start) if t_start + 2 * tau <= b + 1e-12 else None
    if bad:
        reasons.append("schedule not periodic (" + ", ".join(bad) + ")")
    try:
        ok, dev = check_periodicity(inv.basis, tau, tol=TOL_G_MINUS, c=(inv.c1, inv.c2, inv.c3))
    except ValueError as exc:
        raise ValueError(f"cannot test g_- periodicity: {exc}") from None
    if not ok:
        reasons.append(f"g₋ not periodic (deviation {dev:.3g})")

    t1 = t_start + tau
    theta0 = float(inv.theta(t1) - inv.theta(t_start))
    pieces = int(max(8, math.ceil(2 * abs(theta0))))

    def integrand(s):
        return ds.W(s) * np.exp(1j * inv.theta(s))

    sigma0 = complex(integrate(integrand, t_start, t1, abstol=QUAD_ABSTOL, pieces=pieces))
    w_max = float(np.max(np.abs(ds.W(np.linspace(t_start, t1, 512)))))
    tol_sigma = TOL_SIGMA_REL * tau * w_max
    winding = int(round(theta0 / (2 * math.pi)))
    if abs(theta0 - 2 * math.pi * winding) > TOL_THETA:
        reasons.append("theta0 not a multiple of 2 pi")
    if abs(sigma0) > tol_sigma:
        reasons.append("sigma0 nonzero")
    return CyclicReport(tau=tau, t_start=t_start, theta0=theta0, sigma0=sigma0,
                        is_cis=not reasons, winding=winding, tol_theta=TOL_THETA,
                        tol_sigma=tol_sigma, reasons=tuple(reasons))


def find_cis(inv, ds, taus, t_start=None):
    """Cyclic reports for each candidate period in ``taus``."""
    return [cis_conditions(inv, ds, tau=tau, t_start=t_start) for tau in taus]


def h_coefficients(inv: InvariantCoefficients, sched: ParameterSchedule = None, t=None,
                   ds: DriveState = None) -> QuadraticFormCoefficients:
    """h_0, h_+, h_- at ``t``; xi and zeta as well when ``ds`` is given.

    xi = 2i (W^* + sqrt(omega_I / 2 g_-) G) beta and
    zeta = (h_- + omega_I / (M g_-)) beta^2.
    """
    sched = inv.sched if sched is None else sched
    t = np.asarray(t, dtype=float)
    gm, g0, _ = inv.coefficients(t)
    M, Y, w2 = sched.M(t), sched.Y(t), sched.omega_sq(t)
    wI = inv.omega_I
    den = M * gm * wI
    common = g0**2 + M**2 * w2 * gm**2 - 2 * M * Y * g0 * gm
    h0 = (common + wI**2) / den
    h_plus = (common - wI**2 - 2j * g0 * wI + 2j * M * Y * gm * wI) / (2 * den)
    h_minus = (common - wI**2 + 2j * g0 * wI - 2j * M * Y * gm * wI) / (2 * den)
    xi = zeta = None
    if ds is not None:
        beta = ds.beta(t)
        xi = 2j * (np.conj(ds.W(t)) + np.sqrt(wI / (2 * gm)) * sched.G(t)) * beta
        zeta = (h_minus + wI / (M * gm)) * beta**2
    return QuadraticFormCoefficients(t=t, h0=h0, h_plus=h_plus, h_minus=h_minus,
                                     xi=xi, zeta=zeta)


def energy_expectation(psi, grid, sched: ParameterSchedule, t: float) -> float:
    """<psi|H_T(t)|psi> / <psi|psi> with the fourth-order grid operators."""
    q = np.asarray(grid, dtype=float)
    h = _fd.spacing(q)
    hpsi = _fd.apply_hamiltonian(psi, q, sched, t)
    return float((_fd.inner(psi, hpsi, h) / _fd.inner(psi, psi, h)).real)


def _bp_partials(n, inv, ds, sched, t_start, t1, pieces):
    wI = inv.omega_I

    def first(s):
        gm, g0, _ = inv.coefficients(s)
        return g0**2 / (sched.M(s) * gm * wI) - sched.Y(s) * g0 / wI

    def h0_term(s):
        return 0.5 * h_coefficients(inv, sched, s).h0 * np.abs(ds.beta(s)) ** 2

    def xi_term(s):
        return h_coefficients(inv, sched, s, ds).xi.real

    def zeta_term(s):
        return h_coefficients(inv, sched, s, ds).zeta.real

    out = {}
    for key, f in (("first", first), ("h0", h0_term), ("xi", xi_term), ("zeta", zeta_term)):
        out[key] = float(integrate(f, t_start, t1, abstol=QUAD_ABSTOL, pieces=pieces).real)
    out["first"] *= n + 0.5
    return out


def _reconstruct(n, inv, ds, sched, t_start, tau, points, start_nodes=32, max_nodes=4096):
    """chi_n and int <H_T> dt over one period.

    For a cyclic state <H_T> is tau-periodic, so the trapezoid rule on
    equispaced nodes converges geometrically; nodes are doubled until two
    successive sums agree to 1e-12 relative.
    """
    t1 = t_start + tau

    def energy(s):
        q = default_grid(inv, ds, s, n, points=points)
        return energy_expectation(eval_psi(n, inv, ds, t=s, grid=q).psi, q, sched, s)

    chi = float(alpha_phase(n, inv, ds, t=t1) - alpha_phase(n, inv, ds, t=t_start))
    N = start_nodes
    vals = [energy(s) for s in t_start + tau * np.arange(N) / N]
    dyn = tau * np.mean(vals)
    while N < max_nodes:
        mids = [energy(s) for s in t_start + tau * (np.arange(N) + 0.5) / N]
        vals = vals + mids
        N *= 2
        new = tau * np.mean(vals)
        done = abs(new - dyn) <= 1e-12 * max(1.0, abs(new))
        dyn = new
        if done:
            break
    return chi, float(dyn)


def berry_phase(n: int, inv: InvariantCoefficients, ds: DriveState, sched=None,
                tau: float = None, t_start: float = None, report: CyclicReport = None,
                grid_points: int = 2048) -> BerryPhase:
    """Nonadiabatic Berry phase of the cyclic state n over one period.

    ``gamma`` is the closed quadrature

        (n + 1/2) int [g_0^2 / (M g_- omega_I) - Y g_0 / omega_I]
        + int [h_0 |beta|^2 / 2 + Re xi + Re zeta],

    ``gamma_reconstructed`` is chi_n + int <psi_n|H_T|psi_n> dt from grid
    samples, and ``discrepancy`` is |gamma - gamma_reconstructed| divided by
    max(1, |gamma|).  Raises NotCyclicError unless the configuration is
    cyclic (pass ``report`` to reuse an earlier verdict).
    """
    sched = inv.sched if sched is None else sched
    if report is None:
        report = cis_conditions(inv, ds, sched, tau, t_start)
    if not report.is_cis:
        raise NotCyclicError("not a cyclic configuration: " + "; ".join(report.reasons))
    tau, t_start = report.tau, report.t_start
    t1 = t_start + tau
    pieces = int(max(8, math.ceil(2 * abs(report.theta0))))
    parts = _bp_partials(n, inv, ds, sched, t_start, t1, pieces)
    gamma = parts["first"] + parts["h0"] + parts["xi"] + parts["zeta"]
    chi, dyn = _reconstruct(n, inv, ds, sched, t_start, tau, grid_points)
    rec = chi + dyn
    disc = abs(gamma - rec) / max(1.0, abs(gamma))
    return BerryPhase(n=int(n), tau=tau, t_start=t_start, gamma=gamma,
                      gamma_reconstructed=rec, chi=chi, discrepancy=disc, partials=parts)
