import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from conftest import PARAMS_D, general_schedule
from gdo.classical import solve_classical
from gdo.invariant import build_invariant, check_invariant_odes
from gdo.schedule import ParameterSchedule, make_preset


@pytest.fixture(scope="module")
def inv_B():
    s = make_preset("B", {"m": 1, "omega": 2, "gamma": 0.1})
    return build_invariant(solve_classical(s, (0, 50)))


def test_example_B_closed_forms(inv_B):
    t = np.linspace(0, 50, 301)
    gm, g0, gp = inv_B.coefficients(t)
    np.testing.assert_allclose(gm, np.exp(-0.2 * t), rtol=1e-8)
    np.testing.assert_allclose(g0, 0.1, rtol=1e-8)
    np.testing.assert_allclose(gp, 4 * np.exp(0.2 * t), rtol=1e-8)
    assert inv_B.omega_I == pytest.approx(math.sqrt(3.99), rel=1e-10)


def test_example_B_theta_linear(inv_B):
    t = np.linspace(0, 50, 11)
    np.testing.assert_allclose(inv_B.theta(t), math.sqrt(3.99) * t, rtol=1e-10, atol=1e-10)


def test_example_C_coefficients():
    s = make_preset("C", {"m": 2.0, "omega": 3, "F0": 0.7, "omega_e": 2})
    inv = build_invariant(solve_classical(s, (0, 5)))
    t = np.linspace(0, 5, 21)
    gm, g0, gp = inv.coefficients(t)
    np.testing.assert_allclose(gm, 0.5, rtol=1e-10)
    assert np.max(np.abs(g0)) < 1e-10
    np.testing.assert_allclose(gp, 2 * 9, rtol=1e-10)
    assert inv.omega_I == pytest.approx(3.0, rel=1e-12)


def test_example_A_theta():
    inv = build_invariant(solve_classical(make_preset("A", {"m": 1, "omega0": 1.5, "F0": 0.8}), (0, 8)))
    t = np.linspace(0, 8, 17)
    np.testing.assert_allclose(inv.theta(t), 1.5 * t, atol=1e-10)


def test_constant_case_odes_trivial():
    s = ParameterSchedule.from_functions(M=1.0, omega_sq=1.0)
    inv = build_invariant(solve_classical(s, (0, 10)))
    # the ODE side stays exactly constant; what remains is the basis tolerance
    assert check_invariant_odes(inv) < 1e-10


def test_example_D_odes():
    s = make_preset("D", PARAMS_D)
    inv = build_invariant(solve_classical(s, (0, 2 * math.pi / 1.5)))
    assert check_invariant_odes(inv) <= 1e-7


def test_general_schedule_constancy_and_odes():
    inv = build_invariant(solve_classical(general_schedule(), (0, 10)))
    assert inv.omega_I_deviation() <= 1e-8
    assert check_invariant_odes(inv) <= 1e-8


@settings(max_examples=8, deadline=None)
@given(a=st.floats(0.0, 0.4), k=st.floats(0.3, 2.0), y=st.floats(-0.5, 0.5),
       w2=st.floats(1.0, 4.0))
def test_omega_I_constant_random_schedules(a, k, y, w2):
    s = ParameterSchedule.from_functions(
        M=lambda t: 1 + a * np.sin(k * t), dM=lambda t: a * k * np.cos(k * t),
        Y=lambda t: y * np.cos(t), dY=lambda t: -y * np.sin(t),
        omega_sq=lambda t: w2 + 0.5 + a * np.cos(k * t))
    inv = build_invariant(solve_classical(s, (0, 6)))
    assert inv.omega_I_deviation() <= 1e-8


def test_scaling_covariance():
    b = solve_classical(general_schedule(), (0, 6))
    inv = build_invariant(b)
    lam = 3.7
    inv2 = build_invariant(b, c=(0, lam * inv.c2, 0))
    t = np.linspace(0, 6, 31)
    for g, g2 in zip(inv.coefficients(t), inv2.coefficients(t)):
        np.testing.assert_allclose(g2, lam * g, rtol=1e-13, atol=1e-14)
    assert inv2.omega_I == pytest.approx(lam * inv.omega_I, rel=1e-13)
    np.testing.assert_allclose(inv2.theta(t), inv.theta(t), rtol=1e-12, atol=1e-12)


def test_theta_additivity_against_quad():
    inv = build_invariant(solve_classical(general_schedule(), (0, 10)))
    for t1, t2 in [(0.3, 2.9), (4.1, 9.7), (1.0, 1.01)]:
        ref = quad(lambda x: float(inv.theta_rate(x)), t1, t2, epsabs=1e-13, epsrel=1e-13)[0]
        assert abs(inv.theta(t2) - inv.theta(t1) - ref) < 1e-10
    t = np.linspace(0, 10, 200)
    assert np.all(np.diff(inv.theta(t)) > 0)
    assert inv.theta(0.0) == 0.0


def test_theta_with_interior_t0():
    s = make_preset("A", {"m": 1, "omega0": 1.5, "F0": 0.0}, t0=3.0)
    inv = build_invariant(solve_classical(s, (0, 6)))
    np.testing.assert_allclose(inv.theta(np.array([0.0, 3.0, 6.0])), [-4.5, 0.0, 4.5], atol=1e-10)


def test_conjugate_c_pair():
    # c1 = conj(c3) keeps the coefficients real; omega_I still constant
    b = solve_classical(make_preset("C", {"m": 1, "omega": 3, "F0": 0.0, "omega_e": 2}), (0, 4))
    inv = build_invariant(b, c=(0.1 + 0.05j, 1.0, 0.1 - 0.05j))
    assert inv.omega_I_deviation() < 1e-9
    assert check_invariant_odes(inv) < 1e-9


def test_errors():
    b = solve_classical(make_preset("C", {"m": 1, "omega": 3, "F0": 0.0, "omega_e": 2}), (0, 4))
    with pytest.raises(ValueError, match="complex"):
        build_invariant(b, c=(0.1, 1.0, 0.3j))
    with pytest.raises(ValueError):
        build_invariant(b, c=(0.0, -1.0, 0.0))
    with pytest.raises(ValueError):
        build_invariant(b, c=(0, 1.0 + 1j, 0))
    inv = build_invariant(b)
    with pytest.raises(ValueError):
        inv.theta(4.5)


def test_csv_dump(tmp_path):
    b = solve_classical(make_preset("A", {"m": 1, "omega0": 1.0, "F0": 0.0}), (0, 1))
    build_invariant(b).to_csv(tmp_path / "g.csv")
    head = (tmp_path / "g.csv").read_text().splitlines()[0]
    assert head == "t,g_minus,g_zero,g_plus,Theta"
