import json
import math

import numpy as np
import pytest

from conftest import BETA0_C, PARAMS_C, PARAMS_D, build, cyclic_YG_schedule
from gdo import geometric as geo
from gdo.driving import solve_beta
from gdo.schedule import make_preset


def closed_form_C(m, w, we, F0, beta0, r):
    """Closed-form partial integrals and total phase for the forced oscillator."""
    pre = 2 * math.pi * r
    D = w * w - we * we
    A = F0**2 / (2 * m * w)
    base = abs(beta0) ** 2 + F0 * 2 * beta0.imag * we / (math.sqrt(2 * m * w) * D)
    h0 = pre * (base + A * ((w * w + we * we) / D**2 - 0.5 / D))
    xi = -pre * A / D
    zeta = pre * F0**2 / (4 * m * w) / D
    gamma = pre * (base + A * ((w * w + we * we) / D**2 - 1 / D))
    return {"h0": h0, "xi": xi, "zeta": zeta, "gamma": gamma}


@pytest.fixture(scope="module")
def bp_C(scen_C):
    rep = geo.cis_conditions(scen_C.inv, scen_C.ds, tau=2 * math.pi, t_start=0.0)
    return [geo.berry_phase(n, scen_C.inv, scen_C.ds, report=rep) for n in range(3)]


def test_example_A_cyclic(scen_A):
    rep = geo.cis_conditions(scen_A.inv, scen_A.ds, tau=2 * math.pi / 1.5, t_start=0.0)
    assert rep.is_cis and rep.winding == 1 and not rep.reasons


def test_example_B_not_cyclic(scen_B):
    rep = geo.cis_conditions(scen_B.inv, scen_B.ds, tau=math.pi, t_start=0.0)
    assert not rep.is_cis
    assert any(r.startswith("g₋ not periodic") for r in rep.reasons)


def test_example_C_cyclic(scen_C):
    rep = geo.cis_conditions(scen_C.inv, scen_C.ds, tau=2 * math.pi, t_start=0.0)
    assert rep.is_cis and rep.winding == 3
    # one drive period is not enough: beta does not close
    rep = geo.cis_conditions(scen_C.inv, scen_C.ds, tau=math.pi, t_start=0.0)
    assert not rep.is_cis


def test_h_coefficients_example_C(scen_C):
    t = np.linspace(0, 6, 13)
    h = geo.h_coefficients(scen_C.inv, t=t)
    assert np.allclose(h.h0, 6.0, atol=1e-9)
    assert np.allclose(h.h_minus, 0.0, atol=1e-9)
    assert np.allclose(h.h_plus, 0.0, atol=1e-9)


def test_h_coefficients_constant():
    from gdo.schedule import ParameterSchedule
    sc = build(ParameterSchedule.from_functions(M=1.0, omega_sq=1.0), (0, 3))
    h = geo.h_coefficients(sc.inv, t=np.array([0.5, 2.0]))
    assert np.allclose(h.h0, 2.0) and np.allclose(h.h_plus, 0) and np.allclose(h.h_minus, 0)


def test_theta0_independent_of_start(scen_C):
    vals = [geo.cis_conditions(scen_C.inv, scen_C.ds, tau=2 * math.pi, t_start=s).theta0
            for s in (0.0, 0.9, 2.5)]
    assert max(vals) - min(vals) <= 1e-9


def test_sigma0_invariant_under_start_for_cis(scen_C):
    for s in (0.0, 1.7, 4.0):
        rep = geo.cis_conditions(scen_C.inv, scen_C.ds, tau=2 * math.pi, t_start=s)
        assert abs(rep.sigma0) <= rep.tol_sigma


def test_sigma0_independent_of_beta0(scen_C):
    # sigma_0 depends only on W and Theta, not on the initial beta
    other = solve_beta(scen_C.inv, beta0=-0.4 + 0.05j)
    a = geo.cis_conditions(scen_C.inv, scen_C.ds, tau=1.0, t_start=0.2).sigma0
    b = geo.cis_conditions(scen_C.inv, other, tau=1.0, t_start=0.2).sigma0
    assert abs(a - b) < 1e-12


def test_example_C_n_independent(bp_C):
    g = [b.gamma for b in bp_C]
    assert max(g) - min(g) <= 1e-9
    assert all(abs(b.partials["first"]) < 1e-12 for b in bp_C)


def test_example_C_partials_match_closed_form(bp_C):
    ref = closed_form_C(1.0, 3.0, 2.0, PARAMS_C["F0"], BETA0_C, 3)
    parts = bp_C[0].partials
    for key in ("h0", "xi", "zeta"):
        assert parts[key] == pytest.approx(ref[key], rel=1e-6)
    assert bp_C[0].gamma == pytest.approx(ref["gamma"], rel=1e-6)
    assert bp_C[0].gamma == pytest.approx(2.2969530100285906, rel=1e-9)


def test_example_C_two_routes(bp_C):
    for b in bp_C:
        assert b.discrepancy <= 1e-6


def test_undriven_C_zero_phase():
    sc = build(make_preset("C", dict(PARAMS_C, F0=0.0)), (0, 4 * math.pi))
    b = geo.berry_phase(1, sc.inv, sc.ds, tau=2 * math.pi, t_start=0.0)
    assert abs(b.gamma) < 1e-10


def test_two_routes_with_Y_and_G():
    sc = build(cyclic_YG_schedule(), (0, 4 * math.pi), beta0="comoving")
    rep = geo.cis_conditions(sc.inv, sc.ds, tau=2 * math.pi, t_start=0.0)
    assert rep.is_cis
    for n in (0, 2):
        b = geo.berry_phase(n, sc.inv, sc.ds, report=rep)
        assert b.discrepancy <= 1e-8
        assert abs(b.partials["xi"]) > 1e-3  # the G part of xi is exercised


def test_two_routes_example_D_undamped():
    # Gamma has period 4 pi / 3 and Omega = 1, so everything closes after 4 pi
    p = dict(PARAMS_D, gamma=0.0, f0=0.0)
    sc = build(make_preset("D", p), (0, 8 * math.pi + 0.1), beta0=0.1j)
    rep = geo.cis_conditions(sc.inv, sc.ds, tau=4 * math.pi, t_start=0.0)
    assert rep.is_cis, rep.reasons
    assert rep.winding == 2
    b = geo.berry_phase(1, sc.inv, sc.ds, report=rep)
    assert b.discrepancy <= 1e-8


def test_not_cyclic_raises(scen_B):
    with pytest.raises(geo.NotCyclicError, match="g₋ not periodic"):
        geo.berry_phase(0, scen_B.inv, scen_B.ds, tau=math.pi, t_start=0.0)


def test_bad_tau(scen_C):
    for tau in (0.0, -1.0):
        with pytest.raises(ValueError, match="positive"):
            geo.cis_conditions(scen_C.inv, scen_C.ds, tau=tau)
    with pytest.raises(ValueError, match="window"):
        geo.cis_conditions(scen_C.inv, scen_C.ds, tau=20.0)


def test_irrational_flag():
    s = make_preset("C", {"m": 1, "omega": 1, "omega_e": math.sqrt(2), "F0": 0.5, "irrational": True})
    sc = build(s, (0, 40))
    for k in (1, 2, 3, 4):
        rep = geo.cis_conditions(sc.inv, sc.ds, tau=k * s.period, t_start=0.0)
        assert not rep.is_cis
        assert "frequency ratio flagged irrational" in rep.reasons


def test_report_json(scen_C):
    rep = geo.cis_conditions(scen_C.inv, scen_C.ds, tau=2 * math.pi, t_start=0.0)
    d = json.loads(rep.to_json())
    assert set(d) >= {"tau", "theta0", "sigma0", "is_cis", "winding", "tolerances", "reasons"}
    assert d["is_cis"] is True and len(d["sigma0"]) == 2
