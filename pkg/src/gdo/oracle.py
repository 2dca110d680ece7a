"""
Crank-Nicolson propagator for the driven quadratic Hamiltonian on a grid,
and the finite-difference Schrodinger residual.

This module deliberately uses only the schedule and grid samples. It knows
nothing about invariants, beta or the closed-form wave functions, so
agreement with them is an independent check.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import _fd
from .schedule import ParameterSchedule

__all__ = [
    "PropagationResult",
    "OracleError",
    "hamiltonian_bands",
    "hermiticity_defect",
    "propagate",
    "fidelity",
    "phase_aligned_error",
    "fidelity_sweep",
    "convergence_ratios",
    "schrodinger_residual",
    "oracle_grid",
]

NORM_DRIFT_ABORT = 1e-4
BOUNDARY_ABORT = 1e-6
START_BOUNDARY_MAX = 1e-10
DEFAULT_POINTS = 4096
DEFAULT_SPAN_SIGMA = 12.0


class OracleError(RuntimeError):
    """Propagation left its domain of validity (norm blow-up or boundary hit)."""


@dataclass(frozen=True)
class PropagationResult:
    grid: np.ndarray
    psi_final: np.ndarray
    t0: float
    t1: float
    dt: float
    steps: int
    fidelity: float | None
    norm_drift: float
    boundary_max: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["q", "re_psi", "im_psi"])
            for q, p in zip(self.grid, self.psi_final):
                wr.writerow([repr(float(q)), repr(float(p.real)), repr(float(p.imag))])


def oracle_grid(center, sigma, drift=0.0, points=DEFAULT_POINTS, span_sigma=DEFAULT_SPAN_SIGMA):
    """Uniform grid covering ``center`` +- (span_sigma sigma + drift).

    ``drift`` should bound how far the packet centre moves during the run.
    """
    half = span_sigma * sigma + abs(drift)
    return np.linspace(center - half, center + half, points)


def hamiltonian_bands(sched: ParameterSchedule, grid, t):
    """Tridiagonal H(t) as (upper, diag, lower).

    upper[j] = H[j, j+1] and lower[j] = H[j+1, j] for j = 0..N-2. Kinetic
    term by the 3-point stencil, Y(pq+qp)/2 as -(iY/2)(Q D1 + D1 Q) and
    -Gp as iG D1, with D1 the centred difference and Dirichlet ends.
    """
    q = np.asarray(grid, dtype=float)
    h = _fd.spacing(q)
    M, Y, w2 = float(sched.M(t)), float(sched.Y(t)), float(sched.omega_sq(t))
    F, G = float(sched.F(t)), float(sched.G(t))
    qbar = q[:-1] + q[1:]
    kin = -0.5 / (M * h * h)
    upper = kin - 0.5j * Y * qbar / (2 * h) + 1j * G / (2 * h)
    lower = kin + 0.5j * Y * qbar / (2 * h) - 1j * G / (2 * h)
    diag = 1.0 / (M * h * h) + 0.5 * M * w2 * q**2 - F * q
    return upper, diag.astype(complex), lower


def hermiticity_defect(sched: ParameterSchedule, grid, t) -> float:
    """max |H - H^dagger| of the assembled matrix at time t."""
    up, d, lo = hamiltonian_bands(sched, grid, t)
    return float(max(np.max(np.abs(up - np.conj(lo))), np.max(np.abs(d.imag))))


def _apply_bands(up, d, lo, psi):
    out = d * psi
    out[:-1] += up * psi[1:]
    out[1:] += lo * psi[:-1]
    return out


def _step(sched, q, psi, t, dt):
    up, d, lo = hamiltonian_bands(sched, q, t + 0.5 * dt)
    c = 0.5j * dt
    rhs = psi - c * _apply_bands(up, d, lo, psi)
    ab = np.empty((3, q.size), dtype=complex)
    ab[0, 0] = 0
    ab[0, 1:] = c * up
    ab[1] = 1 + c * d
    ab[2, :-1] = c * lo
    ab[2, -1] = 0
    return solve_banded((1, 1), ab, rhs, overwrite_ab=True, overwrite_b=True,
                        check_finite=False)


def _norm2(psi, h):
    return float(np.sum(np.abs(psi) ** 2) * h)


def fidelity(a, b, h) -> float:
    """|<a|b>| / (||a|| ||b||)."""
    return float(abs(_fd.inner(a, b, h)) / (_fd.norm(a, h) * _fd.norm(b, h)))


def phase_aligned_error(numeric, reference, h) -> float:
    """min over a global phase of ||numeric - e^{i phi} reference||.

    Unlike 1 - fidelity, which is quadratic in the state error, this is
    linear in it, so it inherits the dt^2 order of the scheme.
    """
    a2 = _fd.inner(numeric, numeric, h).real
    b2 = _fd.inner(reference, reference, h).real
    ov = abs(_fd.inner(reference, numeric, h))
    return float(math.sqrt(max(a2 + b2 - 2 * ov, 0.0)))


def _check_start(psi0):
    peak = float(np.max(np.abs(psi0)))
    edge = max(abs(psi0[0]), abs(psi0[1]), abs(psi0[-1]), abs(psi0[-2]))
    if edge > START_BOUNDARY_MAX * max(peak, 1.0):
        raise OracleError(f"initial state does not vanish at the grid ends (|psi| = {edge:.3g})")


def _run(sched, q, psi, t0, t1, n_steps, h, n0):
    dt = (t1 - t0) / n_steps
    edge_max = 0.0
    for k in range(n_steps):
        psi = _step(sched, q, psi, t0 + k * dt, dt)
        edge = max(abs(psi[0]), abs(psi[-1]), abs(psi[1]), abs(psi[-2]))
        edge_max = max(edge_max, edge)
        if edge > BOUNDARY_ABORT:
            raise OracleError(
                f"packet reached the grid boundary at t = {t0 + (k + 1) * dt:.6g} "
                f"(|psi| = {edge:.3g} > {BOUNDARY_ABORT})"
            )
        if k % 64 == 63 or k == n_steps - 1:
            drift = abs(_norm2(psi, h) / n0 - 1)
            if drift > NORM_DRIFT_ABORT or not np.isfinite(drift):
                raise OracleError(f"norm drift {drift:.3g} at t = {t0 + (k + 1) * dt:.6g}: unstable")
    return psi, edge_max


def propagate(sched: ParameterSchedule, grid, psi0, t0: float, t1: float, dt: float,
              reference=None) -> PropagationResult:
    """Crank-Nicolson from t0 to t1 with coefficients at step midpoints.

    The step count is ceil((t1 - t0)/dt), so the actual step divides the
    interval exactly. ``reference`` (samples at t1) sets the fidelity.
    """
    q = np.asarray(grid, dtype=float)
    h = _fd.spacing(q)
    psi = np.array(psi0, dtype=complex)
    if psi.shape != q.shape:
        raise ValueError("psi0 and grid have different lengths")
    if dt <= 0 or t1 <= t0:
        raise ValueError("need dt > 0 and t1 > t0")
    _check_start(psi)
    M_min = float(np.min(sched.M(np.linspace(t0, t1, 64))))
    if dt > h * h * M_min * 1e3:
        # CN is unconditionally stable; this only flags very coarse steps
        warnings.warn(f"dt = {dt:.3g} is large compared with h^2 M = {h * h * M_min:.3g}",
                      RuntimeWarning, stacklevel=2)
    n_steps = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    n0 = _norm2(psi, h)
    psi, edge_max = _run(sched, q, psi, t0, t1, n_steps, h, n0)
    drift = abs(_norm2(psi, h) / n0 - 1)
    fid = None if reference is None else fidelity(np.asarray(reference), psi, h)
    return PropagationResult(grid=q, psi_final=psi, t0=float(t0), t1=float(t1),
                             dt=(t1 - t0) / n_steps, steps=n_steps, fidelity=fid,
                             norm_drift=drift, boundary_max=edge_max)


def fidelity_sweep(sched: ParameterSchedule, grid, psi0, reference, t0: float, times,
                   dt_list):
    """Propagate with each dt in ``dt_list`` and compare with ``reference(t)``.

    Returns a list of dicts with keys t, dt, fidelity, infidelity, error
    (phase-aligned L2 error) and norm_drift, one per (dt, t) pair.
    """
    q = np.asarray(grid, dtype=float)
    h = _fd.spacing(q)
    times = np.sort(np.asarray(times, dtype=float))
    if times[0] <= t0:
        raise ValueError("sweep times must lie after t0")
    psi_start = np.array(psi0, dtype=complex)
    _check_start(psi_start)
    n0 = _norm2(psi_start, h)
    refs = [np.asarray(reference(t)) for t in times]
    rows = []
    for dt in dt_list:
        psi, t_prev = psi_start, t0
        for t, ref in zip(times, refs):
            n_steps = max(1, math.ceil((t - t_prev) / dt - 1e-9))
            psi, _ = _run(sched, q, psi, t_prev, t, n_steps, h, n0)
            f = fidelity(ref, psi, h)
            rows.append({
                "t": float(t), "dt": float(dt), "fidelity": f, "infidelity": 1 - f,
                "error": phase_aligned_error(psi, ref, h),
                "norm_drift": abs(_norm2(psi, h) / n0 - 1),
            })
            t_prev = t
    return rows


def convergence_ratios(rows, t=None, key="error"):
    """Successive error ratios e(dt) / e(dt/2) at time ``t`` (default: last).

    A zero error (e.g. a stationary state, whose only error is a global
    phase) gives inf or nan, which no convergence band accepts.
    """
    t = max(r["t"] for r in rows) if t is None else t
    sel = sorted((r for r in rows if abs(r["t"] - t) < 1e-12), key=lambda r: -r["dt"])
    errs = np.array([r[key] for r in sel])
    with np.errstate(divide="ignore", invalid="ignore"):
        return errs[:-1] / errs[1:]


def sweep_to_csv(rows, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "dt", "fidelity", "error", "norm_drift"])
        for r in rows:
            wr.writerow([repr(r[k]) for k in ("t", "dt", "fidelity", "error", "norm_drift")])


def schrodinger_residual(psi_fn, sched: ParameterSchedule, t: float, grid, dt: float) -> float:
    """||i d/dt psi - H_T psi|| / ||psi|| at time t.

    ``psi_fn(s)`` returns samples on ``grid``. The time derivative is the
    Richardson combination (4 D(dt/2) - D(dt)) / 3 of central differences
    D, fourth order in dt; H_T uses the fourth-order spatial stencils.
    """
    q = np.asarray(grid, dtype=float)
    h = _fd.spacing(q)

    def central(d):
        return (psi_fn(t + d) - psi_fn(t - d)) / (2 * d)

    dpsi = (4 * central(0.5 * dt) - central(dt)) / 3
    psi = psi_fn(t)
    r = 1j * dpsi - _fd.apply_hamiltonian(psi, q, sched, t)
    return _fd.norm(r, h) / _fd.norm(psi, h)
