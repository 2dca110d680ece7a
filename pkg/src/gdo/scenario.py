"""
Scenario configs and the end-to-end pipeline behind ``gdo run``.

A scenario is a JSON document (see ``scenario_schema.json``). Running it
solves classical -> invariant -> driving, then performs the requested
tasks and writes ``report.json`` plus CSV files into the output directory.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import geometric, oracle
from . import wavefunction as wf
from .classical import SolverError, solve_classical
from .driving import beta_by_quadrature, check_linear_odes, solve_beta
from .invariant import build_invariant, check_invariant_odes
from .schedule import from_tables, make_preset, validate

__all__ = ["ConfigError", "load_config", "validate_config", "run", "RunResult",
           "DEFAULT_TOLERANCES"]

DEFAULT_TOLERANCES = {
    "wronskian": 1e-8,
    "eom_residual": 1e-8,
    "omega_i": 1e-8,
    "eqo": 1e-7,
    "eqt": 1e-7,
    "beta_quadrature": 1e-8,
    "norm": 1e-6,
    "orthogonality": 1e-6,
    "eigen_residual": 1e-4,
    "schrodinger_residual": 1e-4,
    "moments": 1e-4,
    "berry_discrepancy": 1e-6,
    "berry_expected": 1e-6,
    "infidelity": 1e-4,
    "norm_drift": 1e-8,
}
# dt-halving error ratio window for a second-order scheme; not scaled
CONVERGENCE_BAND = (3.5, 4.5)


class ConfigError(ValueError):
    """Invalid scenario config; the message names the offending field."""


def _schema():
    text = resources.files("gdo").joinpath("scenario_schema.json").read_text()
    return json.loads(text)


def validate_config(cfg: dict) -> dict:
    """Schema and semantic checks. Returns the config unchanged."""
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {e.message}")
    unknown = set(cfg.get("tolerances", {})) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(f"config field tolerances: unknown keys {sorted(unknown)}")
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    cfg.setdefault("name", path.stem)
    return validate_config(cfg)


@dataclass
class _Checks:
    tol: dict
    rows: list = field(default_factory=list)

    def add(self, module, check, value, key=None, allowed=None, passed=None, **detail):
        allowed = self.tol[key] if allowed is None else allowed
        value = float(value)
        if passed is None:
            passed = bool(np.isfinite(value) and value <= allowed)
        row = {"module": module, "check": check, "value": value, "allowed": allowed,
               "passed": bool(passed)}
        row.update(detail)
        self.rows.append(row)
        return passed

    def error(self, module, exc):
        self.rows.append({"module": module, "check": "error", "value": None, "allowed": None,
                          "passed": False, "message": f"{type(exc).__name__}: {exc}"})

    @property
    def ok(self):
        return all(r["passed"] for r in self.rows)


@dataclass
class RunResult:
    status: int
    report: dict
    out_dir: Path


def _build_schedule(cfg):
    s = cfg["schedule"]
    t0 = float(s.get("t0", 0.0))
    if "preset" in s:
        try:
            sched = make_preset(s["preset"], s["constants"], t0=t0)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"config field schedule: {exc}") from None
        if "period" in s:
            sched = replace(sched, period=float(s["period"]))
        return sched
    tb = s["tables"]
    try:
        return from_tables(tb["t"], tb["M"], tb["omega_sq"], Y=tb.get("Y"), F=tb.get("F"),
                           G=tb.get("G"), t0=t0 if "t0" in s else None, period=s.get("period"),
                           name=cfg.get("name", "tables"))
    except ValueError as exc:
        raise ConfigError(f"config field schedule/tables: {exc}") from None


def _c_constants(cfg):
    c = cfg.get("c", "default")
    if c == "default":
        return None
    out = []
    for v in c:
        out.append(complex(v[0], v[1]) if isinstance(v, list) else complex(v))
    return tuple(out)


def _beta0(cfg):
    b = cfg.get("beta0", "zero")
    return b if isinstance(b, str) else complex(b[0], b[1])


def _char_period(cfg, sched, inv=None):
    if "tau" in cfg:
        return float(cfg["tau"])
    if sched.period is not None:
        return float(sched.period)
    if inv is not None:
        return 2 * math.pi / float(inv.theta_rate(sched.t0))
    return 2 * math.pi / float(sched.omega(sched.t0))


def _window(cfg, sched):
    if "window" in cfg:
        a, b = map(float, cfg["window"])
        if not b > a:
            raise ConfigError("config field window: need window[1] > window[0]")
        return a, b
    t0 = sched.t0
    tau = _char_period(cfg, sched)
    ends = [t0 + tau]
    tasks = set(cfg["tasks"])
    if tasks & {"cis", "berry"}:
        ends.append(float(cfg.get("t_start", t0)) + 2 * tau)
    if "times" in cfg:
        ends.append(max(cfg["times"]) + 1e-9)
    if tasks & {"oracle", "sweep"}:
        ends.append(float(cfg.get("oracle", {}).get("t_end", t0 + tau)))
    lo = min([t0] + cfg.get("times", [t0]))
    # room for the central differences of the Schrodinger residual
    margin = 0.02 * tau
    return lo - margin, max(ends) + margin


def _csv_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])


def _task_states(ctx, checks, out, write_csv):
    inv, ds, ns, times, grid_cfg = ctx["inv"], ctx["ds"], ctx["n"], ctx["times"], ctx["grid"]
    name = ctx["name"]
    for i, t in enumerate(times):
        q = wf.default_grid(inv, ds, t, max(ns), **grid_cfg)
        samples = {n: wf.eval_psi(n, inv, ds, t=t, grid=q) for n in ns}
        for n, smp in samples.items():
            checks.add("wavefunction", "norm", abs(smp.norm() - 1), "norm", n=n, t=t)
            if write_csv:
                smp.to_csv(out / f"psi_n{n}_t{i}.csv", scenario=name)
        h = q[1] - q[0]
        worst = 0.0
        for a in ns:
            for b in ns:
                if a < b:
                    ov = abs(np.trapezoid(np.conj(samples[a].psi) * samples[b].psi, dx=h))
                    worst = max(worst, ov)
        if len(ns) > 1:
            checks.add("wavefunction", "orthogonality", worst, "orthogonality", t=t)


def _task_residuals(ctx, checks, out, write_csv):
    inv, ds = ctx["inv"], ctx["ds"]
    rows = []
    for n in ctx["n"]:
        for t in ctx["times"]:
            q = wf.default_grid(inv, ds, t, n, **ctx["grid"])
            e = wf.eigen_residual(n, inv, ds, t=t, grid=q)
            s = wf.schrodinger_residual(n, inv, ds, t, grid=q)
            checks.add("wavefunction", "eigen_residual", e, "eigen_residual", n=n, t=t)
            checks.add("wavefunction", "schrodinger_residual", s, "schrodinger_residual", n=n, t=t)
            rows.append((n, t, e, s))
    if write_csv:
        _csv_rows(out / "residuals.csv", ["n", "t", "eigen_residual", "schrodinger_residual"], rows)


def _task_moments(ctx, checks, out, write_csv):
    inv, ds = ctx["inv"], ctx["ds"]
    rows = []
    for n in ctx["n"]:
        for t in ctx["times"]:
            q = wf.default_grid(inv, ds, t, n, **ctx["grid"])
            got = wf.moments(wf.eval_psi(n, inv, ds, t=t, grid=q))
            exp = wf.exact_moments(n, inv, ds, t)
            rel_q = abs(got[1] - exp[1]) / exp[1]
            rel_p = abs(got[3] - exp[3]) / exp[3]
            checks.add("wavefunction", "var_q", rel_q, "moments", n=n, t=t)
            checks.add("wavefunction", "var_p", rel_p, "moments", n=n, t=t)
            rows.append((n, t) + tuple(float(v) for v in got) + tuple(float(v) for v in exp))
    if write_csv:
        _csv_rows(out / "moments.csv",
                  ["n", "t", "mean_q", "var_q", "mean_p", "var_p",
                   "exact_mean_q", "exact_var_q", "exact_mean_p", "exact_var_p"], rows)


def _cis_report(ctx):
    if "cis_report" not in ctx:
        ctx["cis_report"] = geometric.cis_conditions(ctx["inv"], ctx["ds"], tau=ctx["tau"],
                                                     t_start=ctx["t_start"])
    return ctx["cis_report"]


def _task_cis(ctx, checks, out, write_csv):
    rep = _cis_report(ctx)
    exp = ctx["expect"].get("is_cis")
    if exp is not None:
        checks.add("geometric", "is_cis", float(rep.is_cis != exp), allowed=0.0,
                   expected=exp, reasons=list(rep.reasons))


def _task_berry(ctx, checks, out, write_csv):
    rep = _cis_report(ctx)
    if not rep.is_cis:
        checks.add("geometric", "berry requires a cyclic state", 1.0, allowed=0.0,
                   reasons=list(rep.reasons))
        return
    exp = ctx["expect"].get("gamma")
    for n in ctx["n"]:
        bp = geometric.berry_phase(n, ctx["inv"], ctx["ds"], report=rep)
        row = bp.as_row()
        row["partials"] = bp.partials
        rep.per_n.append(row)
        checks.add("geometric", "berry two-route discrepancy", bp.discrepancy,
                   "berry_discrepancy", n=n)
        if exp is not None:
            checks.add("geometric", "berry vs expected", abs(bp.gamma - exp) / max(1.0, abs(exp)),
                       "berry_expected", n=n, gamma=bp.gamma, expected=exp)


def _oracle_setup(ctx, n, t_end):
    inv, ds = ctx["inv"], ctx["ds"]
    t0 = ctx["t_start"]
    o = ctx["oracle"]
    tt = np.linspace(t0, t_end, 256)
    centre = -ds.shifts(tt)[0]
    sigma = np.sqrt(inv.g_minus(tt) / inv.omega_I) * math.sqrt(2 * n + 1)
    q = oracle.oracle_grid(0.5 * (centre.max() + centre.min()), float(sigma.max()),
                           0.5 * (centre.max() - centre.min()),
                           points=o.get("points", oracle.DEFAULT_POINTS),
                           span_sigma=o.get("span_sigma", oracle.DEFAULT_SPAN_SIGMA))
    return q, lambda t: wf.eval_psi(n, inv, ds, t=t, grid=q).psi


def _task_oracle(ctx, checks, out, write_csv):
    o = ctx["oracle"]
    t0 = ctx["t_start"]
    t_end = float(o.get("t_end", t0 + ctx["tau"]))
    dt = ctx["tau"] / o.get("steps_per_period", 2000)
    for n in ctx["n"]:
        q, ref = _oracle_setup(ctx, n, t_end)
        res = oracle.propagate(ctx["sched"], q, ref(t0), t0, t_end, dt, reference=ref(t_end))
        checks.add("oracle", "infidelity", 1 - res.fidelity, "infidelity", n=n, t=t_end)
        checks.add("oracle", "norm_drift", res.norm_drift, "norm_drift", n=n, t=t_end)
        if write_csv:
            res.to_csv(out / f"oracle_n{n}.csv")


def _task_sweep(ctx, checks, out, write_csv):
    o = ctx["oracle"]
    t0 = ctx["t_start"]
    t_end = float(o.get("t_end", t0 + ctx["tau"]))
    divisors = o.get("sweep_divisors", [100, 200, 400])
    n = ctx["n"][0]
    q, ref = _oracle_setup(ctx, n, t_end)
    dts = [ctx["tau"] / d for d in sorted(divisors)]
    rows = oracle.fidelity_sweep(ctx["sched"], q, ref(t0), ref, t0, [t_end], dts)
    lo, hi = CONVERGENCE_BAND
    for k, r in enumerate(oracle.convergence_ratios(rows)):
        checks.add("oracle", "dt-halving error ratio", r, allowed=[lo, hi],
                   passed=bool(lo <= r <= hi), n=n, halving=k + 1)
    if write_csv:
        oracle.sweep_to_csv(rows, out / "sweep.csv")


_TASKS = {
    "states": ("wavefunction", _task_states),
    "residuals": ("wavefunction", _task_residuals),
    "moments": ("wavefunction", _task_moments),
    "cis": ("geometric", _task_cis),
    "berry": ("geometric", _task_berry),
    "oracle": ("oracle", _task_oracle),
    "sweep": ("oracle", _task_sweep),
}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def run(cfg: dict, out_dir=None, tol_scale: float = 1.0) -> RunResult:
    """Execute a validated scenario; returns exit status 0 (pass) or 1."""
    validate_config(cfg)
    if not tol_scale > 0:
        raise ConfigError("tol-scale must be positive")
    started = time.time()
    name = cfg.get("name", "scenario")
    out = Path(out_dir or cfg.get("output", {}).get("dir", f"gdo-out/{name}"))
    out.mkdir(parents=True, exist_ok=True)
    write_csv = cfg.get("output", {}).get("csv", True)

    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    tol = {k: v * tol_scale for k, v in tol.items()}
    checks = _Checks(tol)

    sched = _build_schedule(cfg)
    window = _window(cfg, sched)
    times = [float(t) for t in cfg.get("times", [sched.t0])]
    report = {"scenario": name, "window": list(window)}

    ctx = None
    stage = "schedule"
    try:
        bad = validate(sched, window)
        for v in bad:
            if not v.invariant.endswith("periodic"):
                checks.add("schedule", v.invariant, 1.0, allowed=0.0, t=v.t)
        stage = "classical"
        basis = solve_classical(sched, window, tol=float(cfg.get("classical_tol", 1e-12)))
        checks.add("classical", "wronskian", basis.wronskian_deviation(), "wronskian")
        checks.add("classical", "eom_residual", basis.eom_residual(), "eom_residual")
        stage = "invariant"
        inv = build_invariant(basis, c=_c_constants(cfg))
        checks.add("invariant", "omega_I constancy", inv.omega_I_deviation(), "omega_i")
        checks.add("invariant", "closed form vs ODE", check_invariant_odes(inv), "eqo")
        stage = "driving"
        ds = solve_beta(inv, beta0=_beta0(cfg))
        checks.add("driving", "closed form vs ODE", check_linear_odes(ds), "eqt")
        tq = np.linspace(window[0], window[1], 64)
        checks.add("driving", "beta ODE vs quadrature",
                   float(np.max(np.abs(beta_by_quadrature(ds, tq) - ds.beta(tq)))),
                   "beta_quadrature")
        report["invariant"] = {"omega_I": inv.omega_I, "c": [inv.c1, inv.c2, inv.c3]}
        report["beta0"] = ds.beta0
        if write_csv:
            basis.to_csv(out / "classical.csv")
            inv.to_csv(out / "invariant.csv")
            ds.to_csv(out / "beta.csv")
        ctx = {
            "name": name, "sched": sched, "inv": inv, "ds": ds,
            "n": sorted(cfg.get("n", [0])), "times": times,
            "grid": dict(cfg.get("grid", {})),
            "tau": _char_period(cfg, sched, inv),
            "t_start": float(cfg.get("t_start", sched.t0)),
            "oracle": cfg.get("oracle", {}),
            "expect": cfg.get("expect", {}),
        }
    except (ValueError, SolverError, ArithmeticError) as exc:
        checks.error(stage, exc)

    if ctx is not None:
        for task in sorted(cfg["tasks"], key=list(_TASKS).index):
            module, fn = _TASKS[task]
            try:
                fn(ctx, checks, out, write_csv)
            except (ValueError, SolverError, oracle.OracleError, ArithmeticError) as exc:
                checks.error(module, exc)
        if "cis_report" in ctx:
            report["cis"] = ctx["cis_report"].to_dict()

    report["checks"] = checks.rows
    report["passed"] = checks.ok
    report["meta"] = {
        "version": __version__,
        "started": _dt.datetime.fromtimestamp(started, _dt.timezone.utc).isoformat(),
        "elapsed_s": round(time.time() - started, 3),
        "tol_scale": tol_scale,
    }
    report = _jsonable(report)
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return RunResult(status=0 if checks.ok else 1, report=report, out_dir=out)
