import ast
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import build
from gdo import oracle, wavefunction as wf
from gdo.schedule import ParameterSchedule


def _ground(q, m=1.0, w=1.0, shift=0.0):
    return (m * w / math.pi) ** 0.25 * np.exp(-m * w * (q - shift) ** 2 / 2)


@settings(max_examples=40, deadline=None)
@given(M=st.floats(0.2, 5), Y=st.floats(-2, 2), w2=st.floats(0.1, 9),
       F=st.floats(-3, 3), G=st.floats(-3, 3), t=st.floats(0, 10))
def test_hamiltonian_hermitian(M, Y, w2, F, G, t):
    s = ParameterSchedule.from_functions(M=M, omega_sq=w2 + Y * Y, Y=Y, F=F, G=G, dM=0.0, dY=0.0)
    q = np.linspace(-5, 5, 101)
    assert oracle.hermiticity_defect(s, q, t) < 1e-12


def test_stationary_ground_state():
    s = ParameterSchedule.from_functions(M=1.0, omega_sq=1.0)
    q = np.linspace(-12, 12, 2048)
    psi0 = _ground(q)
    res = oracle.propagate(s, q, psi0, 0.0, 2 * math.pi, 2 * math.pi / 2000, reference=psi0)
    assert res.fidelity >= 1 - 1e-6
    assert res.norm_drift <= 1e-10
    assert res.steps == 2000


def _analytic_run(sc, n, t0, t1, steps, points=4096):
    s0, s1 = wf.eval_psi(n, sc.inv, sc.ds, t=t0), wf.eval_psi(n, sc.inv, sc.ds, t=t1)
    sigma = math.sqrt(float(sc.inv.g_minus(t0)) / sc.inv.omega_I) * math.sqrt(2 * n + 1)
    centres = -np.array([sc.ds.shifts(t)[0] for t in np.linspace(t0, t1, 64)])
    q = oracle.oracle_grid(centres.mean(), sigma, np.ptp(centres) / 2, points=points)
    ref = wf.eval_psi(n, sc.inv, sc.ds, t=t1, grid=q).psi
    psi0 = wf.eval_psi(n, sc.inv, sc.ds, t=t0, grid=q).psi
    assert s0.n == s1.n == n
    return oracle.propagate(sc.sched, q, psi0, t0, t1, (t1 - t0) / steps, reference=ref)


def test_example_A_one_period(scen_A):
    res = _analytic_run(scen_A, 0, 0.0, 2 * math.pi / 1.5, 2000)
    assert res.fidelity >= 1 - 1e-6 and res.norm_drift <= 1e-10


def test_example_C_excited_half_drive_period(scen_C):
    res = _analytic_run(scen_C, 2, 0.0, math.pi / 2, 1000)
    assert res.fidelity >= 1 - 1e-6


def test_general_schedule(scen_general):
    res = _analytic_run(scen_general, 1, 1.0, 4.0, 2000)
    assert res.fidelity >= 1 - 1e-6


def test_convergence_ratio_example_B(scen_B):
    sc = scen_B
    T = 2 * math.pi / math.sqrt(3.99)
    sigma = math.sqrt(float(sc.inv.g_minus(0)) / sc.inv.omega_I)
    centres = -np.array([sc.ds.shifts(t)[0] for t in np.linspace(0, T, 64)])
    q = oracle.oracle_grid(centres.mean(), sigma, np.ptp(centres) / 2)
    ref = lambda t: wf.eval_psi(0, sc.inv, sc.ds, t=t, grid=q).psi  # noqa: E731
    rows = oracle.fidelity_sweep(sc.sched, q, ref(0.0), ref, 0.0, [T],
                                 [T / 100, T / 200, T / 400])
    ratios = oracle.convergence_ratios(rows)
    assert np.all((ratios >= 3.5) & (ratios <= 4.5)), ratios
    # 1 - F is quadratic in the state error
    inf = oracle.convergence_ratios(rows, key="infidelity")
    assert np.all(inf > 10)


def test_boundary_watchdog():
    s = ParameterSchedule.from_functions(M=1.0, omega_sq=1.0)
    q = np.linspace(-9, 9, 1024)
    psi0 = _ground(q, shift=2.0) * np.exp(5j * q)  # swings out to |q| ~ 5.4
    with pytest.raises(oracle.OracleError, match="boundary"):
        oracle.propagate(s, q, psi0, 0.0, math.pi, 0.01)


def test_start_boundary_rejected():
    s = ParameterSchedule.from_functions(M=1.0, omega_sq=1.0)
    q = np.linspace(-3, 3, 512)
    with pytest.raises(oracle.OracleError, match="vanish"):
        oracle.propagate(s, q, _ground(q), 0.0, 1.0, 0.01)


def test_bad_arguments():
    s = ParameterSchedule.from_functions(M=1.0, omega_sq=1.0)
    q = np.linspace(-10, 10, 512)
    with pytest.raises(ValueError):
        oracle.propagate(s, q, _ground(q), 1.0, 0.5, 0.01)
    with pytest.raises(ValueError):
        oracle.propagate(s, q, _ground(q)[:-1], 0.0, 1.0, 0.01)


def test_coarse_step_warns():
    s = ParameterSchedule.from_functions(M=1.0, omega_sq=1.0)
    q = np.linspace(-10, 10, 4096)
    with pytest.warns(RuntimeWarning):
        oracle.propagate(s, q, _ground(q), 0.0, 1.0, 0.5)


def test_oracle_is_independent():
    src = Path(oracle.__file__).read_text()
    names = set()
    for node in ast.walk(ast.parse(src)):
        if isinstance(node, ast.ImportFrom):
            names.add(node.module or "")
            names.update(a.name for a in node.names)
        elif isinstance(node, ast.Import):
            names.update(a.name for a in node.names)
    for banned in ("invariant", "driving", "wavefunction", "geometric", "classical"):
        assert not any(banned in nm for nm in names), banned


def test_residual_of_stationary_state():
    s = ParameterSchedule.from_functions(M=1.0, omega_sq=4.0)
    q = np.linspace(-8, 8, 2048)
    psi = lambda t: _ground(q, w=2.0) * np.exp(-1j * t)  # noqa: E731
    assert oracle.schrodinger_residual(psi, s, 0.7, q, 0.01) < 1e-6
    wrong = lambda t: _ground(q, w=2.0) * np.exp(-2j * t)  # noqa: E731
    assert oracle.schrodinger_residual(wrong, s, 0.7, q, 0.01) > 0.5


def test_csv(tmp_path):
    s = ParameterSchedule.from_functions(M=1.0, omega_sq=1.0)
    q = np.linspace(-10, 10, 256)
    res = oracle.propagate(s, q, _ground(q), 0.0, 0.1, 0.01)
    res.to_csv(tmp_path / "o.csv")
    assert len((tmp_path / "o.csv").read_text().splitlines()) == 257


def test_ratio_undefined_for_stationary_state():
    rows = [{"t": 1.0, "dt": 0.1, "error": 0.0}, {"t": 1.0, "dt": 0.05, "error": 0.0}]
    r = oracle.convergence_ratios(rows)
    assert not (3.5 <= r[0] <= 4.5)
