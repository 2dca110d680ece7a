"""
Time-dependent coefficient schedules for the generalized driven oscillator

    H_T(t) = p^2 / 2M + Y (pq + qp) / 2 + M omega^2 q^2 / 2 - F q - G p

with hbar = 1.  A schedule bundles the five coefficient functions together
with the derivatives of M and Y (both appear in the classical equation of
motion), an optional period and the reference time t0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "ParameterSchedule",
    "SRepresentation",
    "Violation",
    "PRESETS",
    "make_preset",
    "from_tables",
    "validate",
    "to_s_representation",
    "preset_table",
]

TOL_PER = 1e-9

Func = Callable[[np.ndarray], np.ndarray]


def _constant(value: float) -> Func:
    value = float(value)

    def f(t):
        return np.full(np.shape(t), value)

    return f


def _as_func(value) -> Func:
    if not callable(value):
        return _constant(value)

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(value(t), dtype=float), t.shape).copy()

    return f


@dataclass(frozen=True)
class ParameterSchedule:
    """Coefficients M, Y, omega^2, F, G of the quadratic Hamiltonian.

    All coefficient attributes are vectorized callables of time. ``dM`` and
    ``dY`` are the exact time derivatives of ``M`` and ``Y``. ``F`` and ``G``
    follow the sign convention ``H_T = H - F q - G p``.
    """

    M: Func
    Y: Func
    omega_sq: Func
    F: Func
    G: Func
    dM: Func
    dY: Func
    t0: float = 0.0
    period: Optional[float] = None
    name: str = "custom"
    meta: Mapping = field(default_factory=lambda: MappingProxyType({}))

    @classmethod
    def from_functions(cls, M, omega_sq, Y=0.0, F=0.0, G=0.0, dM=None, dY=None,
                       t0=0.0, period=None, name="custom", meta=None):
        """Build a schedule from constants and/or callables.

        Time-dependent ``M`` or ``Y`` need their derivative passed explicitly
        as ``dM`` / ``dY``; constants get a zero derivative.
        """
        if dM is None:
            if callable(M):
                raise ValueError("time-dependent M requires its derivative dM")
            dM = 0.0
        if dY is None:
            if callable(Y):
                raise ValueError("time-dependent Y requires its derivative dY")
            dY = 0.0
        if period is not None and period <= 0:
            raise ValueError(f"period must be positive, got {period}")
        return cls(
            M=_as_func(M), Y=_as_func(Y), omega_sq=_as_func(omega_sq),
            F=_as_func(F), G=_as_func(G), dM=_as_func(dM), dY=_as_func(dY),
            t0=float(t0), period=None if period is None else float(period),
            name=name, meta=MappingProxyType(dict(meta or {})),
        )

    def omega(self, t):
        """Positive root of omega^2(t)."""
        w2 = self.omega_sq(t)
        if np.any(w2 <= 0):
            raise ValueError("omega^2(t) <= 0; omega is undefined")
        return np.sqrt(w2)

    def spring(self, t):
        """Coefficient of f in the classical equation of motion divided by M:
        omega^2 - Y^2 - (dM/M) Y - dY."""
        t = np.asarray(t, dtype=float)
        Y = self.Y(t)
        return self.omega_sq(t) - Y**2 - self.dM(t) / self.M(t) * Y - self.dY(t)

    def with_drive(self, F=None, G=None) -> "ParameterSchedule":
        """Copy of the schedule with the linear drives replaced."""
        return ParameterSchedule(
            M=self.M, Y=self.Y, omega_sq=self.omega_sq,
            F=self.F if F is None else _as_func(F),
            G=self.G if G is None else _as_func(G),
            dM=self.dM, dY=self.dY, t0=self.t0, period=self.period,
            name=self.name, meta=self.meta,
        )


@dataclass(frozen=True)
class SRepresentation:
    """Coefficients of H_T written with ladder operators of frequency omega(t):

        H_T = s1 a^2 + s1* a^dag^2 + s2 (a^dag a + a a^dag) + s3 a^dag + s3* a
    """

    s1: Func
    s2: Func
    s3: Func


@dataclass(frozen=True)
class Violation:
    invariant: str
    t: float
    values: dict

    def __str__(self):
        vals = ", ".join(f"{k}={v:.6g}" for k, v in self.values.items())
        return f"{self.invariant} violated at t={self.t:.6g} ({vals})"


# --------------------------------------------------------------------------
# presets

def _require(params: Mapping, names, preset):
    missing = [k for k in names if k not in params]
    if missing:
        raise ValueError(f"preset {preset}: missing constant(s) {', '.join(missing)}")


def _sinusoid(amplitude, frequency, phase):
    if amplitude == 0.0:
        return _constant(0.0)
    return lambda t: amplitude * np.sin(frequency * np.asarray(t, dtype=float) + phase)


def _preset_A(p, t0):
    _require(p, ("m", "omega0", "F0"), "A")
    m, w0, F0 = float(p["m"]), float(p["omega0"]), float(p["F0"])
    if m <= 0:
        raise ValueError("preset A: mass m must be positive")
    if w0 <= 0:
        raise ValueError("preset A: omega0 must be positive")
    return ParameterSchedule.from_functions(
        M=m, omega_sq=w0**2, F=F0, t0=t0, period=2 * math.pi / w0, name="A",
        meta={"constants": dict(p)},
    )


def _preset_B(p, t0, drive=None):
    # H = p^2/(2 m e^{2 gamma t}) + e^{2 gamma t} (m omega^2 q^2 / 2 + f(t) q),
    # so F(t) = -e^{2 gamma t} f(t) in the -F q convention.
    _require(p, ("m", "omega", "gamma"), "B")
    m, w, g = float(p["m"]), float(p["omega"]), float(p["gamma"])
    if m <= 0:
        raise ValueError("preset B: mass m must be positive")
    if drive is None:
        drive = _sinusoid(float(p.get("f0", 0.0)), float(p.get("omega_d", 0.0)),
                          float(p.get("phi_d", 0.0)))
        has_drive = float(p.get("f0", 0.0)) != 0.0
    else:
        has_drive = True

    def M(t):
        return m * np.exp(2 * g * np.asarray(t, dtype=float))

    def dM(t):
        return 2 * g * M(t)

    def F(t):
        t = np.asarray(t, dtype=float)
        return -np.exp(2 * g * t) * np.asarray(drive(t), dtype=float)

    period = None
    if g == 0.0:
        if not has_drive:
            period = 2 * math.pi / w
        elif float(p.get("omega_d", 0.0)) > 0:
            period = 2 * math.pi / float(p["omega_d"])
    return ParameterSchedule.from_functions(
        M=M, dM=dM, omega_sq=w**2, F=F, t0=t0, period=period, name="B",
        meta={"constants": dict(p)},
    )


def _preset_C(p, t0):
    # f(t) = -F0 sin(omega_e t) enters H as +f q, i.e. F(t) = F0 sin(omega_e t).
    _require(p, ("m", "omega", "F0"), "C")
    m, w, F0 = float(p["m"]), float(p["omega"]), float(p["F0"])
    if m <= 0:
        raise ValueError("preset C: mass m must be positive")
    meta = {"constants": dict(p)}
    if "r" in p or "r_e" in p:
        _require(p, ("r", "r_e"), "C")
        r, r_e = int(p["r"]), int(p["r_e"])
        if r <= 0 or r_e <= 0:
            raise ValueError("preset C: r and r_e must be positive integers")
        we = w * r_e / r
        if "omega_e" in p and not math.isclose(float(p["omega_e"]), we, rel_tol=1e-12):
            raise ValueError("preset C: omega_e inconsistent with omega * r_e / r")
        meta["ratio"] = (r // math.gcd(r, r_e), r_e // math.gcd(r, r_e))
    else:
        _require(p, ("omega_e",), "C")
        we = float(p["omega_e"])
    if we == 0:
        raise ValueError("preset C: omega_e must be nonzero")
    if p.get("irrational", False):
        if "ratio" in meta:
            raise ValueError("preset C: irrational flag conflicts with integer ratio r, r_e")
        meta["irrational"] = True
    return ParameterSchedule.from_functions(
        M=m, omega_sq=w**2, F=_sinusoid(F0, we, 0.0), t0=t0,
        period=2 * math.pi / abs(we), name="C", meta=meta,
    )


def _preset_D(p, t0, drive=None):
    # M = m0 exp(2 Gamma), Gamma = gamma t + mu sin(nu t). The frequency is
    # chosen so that f1 = exp(-Gamma + i Omega t) solves the equation of
    # motion: omega^2 = Omega^2 + Gamma'^2 + Gamma'' = Omega^2 + (sqrt M)''/sqrt M.
    _require(p, ("m0", "Omega", "gamma", "mu", "nu"), "D")
    m0, Om = float(p["m0"]), float(p["Omega"])
    g, mu, nu = float(p["gamma"]), float(p["mu"]), float(p["nu"])
    if m0 <= 0:
        raise ValueError("preset D: mass m0 must be positive")
    if drive is None:
        drive = _sinusoid(float(p.get("f0", 0.0)), float(p.get("omega_d", 0.0)),
                          float(p.get("phi_d", 0.0)))
        has_drive = float(p.get("f0", 0.0)) != 0.0
    else:
        has_drive = True

    def Gam_dot(t):
        return g + mu * nu * np.cos(nu * np.asarray(t, dtype=float))

    def Gam_ddot(t):
        return -mu * nu**2 * np.sin(nu * np.asarray(t, dtype=float))

    def M(t):
        t = np.asarray(t, dtype=float)
        return m0 * np.exp(2 * (g * t + mu * np.sin(nu * t)))

    def dM(t):
        return 2 * Gam_dot(t) * M(t)

    def omega_sq(t):
        return Om**2 + Gam_dot(t) ** 2 + Gam_ddot(t)

    period = None
    if g == 0.0 and not has_drive and nu != 0.0:
        period = 2 * math.pi / abs(nu)
    if g == 0.0 and has_drive and "period" in p:
        period = float(p["period"])
    return ParameterSchedule.from_functions(
        M=M, dM=dM, omega_sq=omega_sq, F=drive, t0=t0, period=period, name="D",
        meta={"constants": dict(p)},
    )


# name -> (builder, required constants, optional constants, description)
PRESETS = {
    "A": (_preset_A, ("m", "omega0", "F0"), (),
          "constant oscillator with constant force"),
    "B": (_preset_B, ("m", "omega", "gamma"), ("f0", "omega_d", "phi_d"),
          "Caldirola-Kanai oscillator, drive f(t) = f0 sin(omega_d t + phi_d)"),
    "C": (_preset_C, ("m", "omega", "F0"), ("omega_e", "r", "r_e", "irrational"),
          "undamped oscillator, F(t) = F0 sin(omega_e t)"),
    "D": (_preset_D, ("m0", "Omega", "gamma", "mu", "nu"), ("f0", "omega_d", "phi_d", "period"),
          "damped pulsating oscillator, F(t) = f0 sin(omega_d t + phi_d)"),
}

_ALIASES = {"omega_0": "omega0", "w0": "omega0", "w": "omega", "we": "omega_e",
            "Ω": "Omega", "ω": "omega", "ω₀": "omega0", "ω_e": "omega_e",
            "γ": "gamma", "μ": "mu", "ν": "nu", "m₀": "m0", "F₀": "F0"}


def make_preset(name: str, params: Mapping, t0: float = 0.0, drive=None) -> ParameterSchedule:
    """Schedule for one of the worked examples A-D.

    Parameters
    ----------
    name : {"A", "B", "C", "D"}
    params : mapping
        Named constants; see ``PRESETS`` for the required and optional names.
    t0 : float
        Reference time of the scenario.
    drive : callable, optional
        Drive for presets B (the force f(t) in the Caldirola-Kanai form) and D
        (F(t) directly). Overrides the sinusoidal drive constants.
    """
    key = str(name).upper()
    if key not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    params = {_ALIASES.get(k, k): v for k, v in dict(params).items()}
    builder = PRESETS[key][0]
    if key in ("B", "D"):
        return builder(params, float(t0), drive)
    if drive is not None:
        raise ValueError(f"preset {key} does not take a drive function")
    return builder(params, float(t0))


def preset_table() -> list:
    """Rows (name, required constants, optional constants, description)."""
    return [(k, list(v[1]), list(v[2]), v[3]) for k, v in PRESETS.items()]


def from_tables(t, M, omega_sq, Y=None, F=None, G=None, t0=None, period=None,
                name="tables") -> ParameterSchedule:
    """Schedule interpolated from sampled coefficients with cubic splines.

    Derivatives of M and Y come from the spline itself.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 4:
        raise ValueError("tables need at least 4 time samples")
    if np.any(np.diff(t) <= 0):
        raise ValueError("table times must be strictly increasing")

    def spline(values, label):
        values = np.asarray(values, dtype=float)
        if values.shape != t.shape:
            raise ValueError(f"table {label!r} has {values.size} samples, expected {t.size}")
        return CubicSpline(t, values)

    zeros = np.zeros_like(t)
    sM = spline(M, "M")
    sY = spline(zeros if Y is None else Y, "Y")
    sW = spline(omega_sq, "omega_sq")
    sF = spline(zeros if F is None else F, "F")
    sG = spline(zeros if G is None else G, "G")
    dM, dY = sM.derivative(), sY.derivative()
    wrap = lambda s: (lambda x: s(np.asarray(x, dtype=float)))  # noqa: E731
    return ParameterSchedule(
        M=wrap(sM), Y=wrap(sY), omega_sq=wrap(sW), F=wrap(sF), G=wrap(sG),
        dM=wrap(dM), dY=wrap(dY),
        t0=float(t[0] if t0 is None else t0),
        period=None if period is None else float(period),
        name=name, meta=MappingProxyType({"table_range": (float(t[0]), float(t[-1]))}),
    )


# --------------------------------------------------------------------------

def validate(sched: ParameterSchedule, window, n_check: int = 100,
             tol_per: float = TOL_PER) -> list:
    """Check the schedule invariants on an ``n_check`` point grid.

    Returns a list of :class:`Violation`; empty means the schedule is valid
    on ``window``. At most one violation per invariant and coefficient is
    reported (the first offending time).
    """
    a, b = float(window[0]), float(window[1])
    if not b > a:
        raise ValueError("window must be a non-empty interval")
    if n_check < 2:
        raise ValueError("n_check must be >= 2")
    t = np.linspace(a, b, int(n_check))
    out = []

    M = sched.M(t)
    bad = np.flatnonzero(~(M > 0))
    if bad.size:
        i = bad[0]
        out.append(Violation("M>0", float(t[i]), {"M": float(M[i]), "count": int(bad.size)}))

    Y = sched.Y(t)
    w2 = sched.omega_sq(t)
    gap = w2 - Y**2
    bad = np.flatnonzero(~(gap > 0))
    if bad.size:
        i = bad[0]
        out.append(Violation("ω²−Y²>0", float(t[i]),
                             {"omega_sq": float(w2[i]), "Y": float(Y[i]), "count": int(bad.size)}))

    if sched.period is not None:
        tau = sched.period
        for label in ("M", "Y", "omega_sq", "F", "G"):
            f = getattr(sched, label)
            x0, x1 = f(t), f(t + tau)
            dev = np.abs(x1 - x0) - tol_per * (1 + np.abs(x0))
            bad = np.flatnonzero(dev > 0)
            if bad.size:
                i = bad[0]
                out.append(Violation(f"{label} periodic", float(t[i]),
                                     {"X(t)": float(x0[i]), "X(t+tau)": float(x1[i]),
                                      "tau": tau, "count": int(bad.size)}))
    return out


def to_s_representation(sched: ParameterSchedule) -> SRepresentation:
    """Ladder-operator coefficients s1 = -iY/2, s2 = omega/2,
    s3 = (-F + i M omega G) / sqrt(2 M omega)."""

    def s1(t):
        return -0.5j * sched.Y(t)

    def s2(t):
        return 0.5 * sched.omega(t)

    def s3(t):
        t = np.asarray(t, dtype=float)
        M, w = sched.M(t), sched.omega(t)
        return (-sched.F(t) + 1j * M * w * sched.G(t)) / np.sqrt(2 * M * w)

    return SRepresentation(s1=s1, s2=s2, s3=s3)
