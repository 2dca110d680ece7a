import math
from types import SimpleNamespace

import numpy as np
import pytest

from gdo.classical import solve_classical
from gdo.driving import solve_beta
from gdo.invariant import build_invariant
from gdo.schedule import ParameterSchedule, make_preset

# parameter sets shared by the test modules
PARAMS_A = {"m": 1.0, "omega0": 1.5, "F0": 0.8}
PARAMS_B = {"m": 1.0, "omega": 2.0, "gamma": 0.1, "f0": 0.5, "omega_d": 1.3}
PARAMS_C = {"m": 1.0, "omega": 3.0, "F0": 0.7, "r": 3, "r_e": 2}
PARAMS_D = {"m0": 1.0, "Omega": 1.0, "gamma": 0.05, "mu": 0.2, "nu": 1.5, "f0": 0.4, "omega_d": 1.7}
BETA0_C = 0.1 + 0.2j


def build(sched, window, beta0=0.0, c=None, tol=1e-12):
    basis = solve_classical(sched, window, tol=tol)
    inv = build_invariant(basis, c=c)
    ds = solve_beta(inv, beta0=beta0)
    return SimpleNamespace(sched=sched, basis=basis, inv=inv, ds=ds, window=window)


def general_schedule(F=0.4, G=0.3):
    """Smooth schedule with every coefficient time dependent."""
    return ParameterSchedule.from_functions(
        M=lambda t: 1.2 + 0.3 * np.cos(0.7 * t), dM=lambda t: -0.21 * np.sin(0.7 * t),
        Y=lambda t: 0.3 * np.sin(t), dY=lambda t: 0.3 * np.cos(t),
        omega_sq=lambda t: 2 + 0.5 * np.sin(1.3 * t),
        F=lambda t: F * np.cos(2 * t), G=lambda t: G * np.sin(1.1 * t),
    )


def cyclic_YG_schedule():
    """Constant M, Y with pi-periodic F and G; cyclic over 2 pi."""
    Y = 0.5
    return ParameterSchedule.from_functions(
        M=1.0, Y=Y, dM=0.0, dY=0.0, omega_sq=1 + Y * Y,
        F=lambda t: 0.3 * np.sin(2 * t), G=lambda t: 0.2 * np.cos(2 * t), period=math.pi,
    )


@pytest.fixture(scope="session")
def scen_A():
    s = make_preset("A", PARAMS_A)
    return build(s, (0.0, 2 * s.period), beta0="comoving")


@pytest.fixture(scope="session")
def scen_B():
    return build(make_preset("B", PARAMS_B), (0.0, 10.0), beta0=0.2 + 0.1j)


@pytest.fixture(scope="session")
def scen_C():
    s = make_preset("C", PARAMS_C)
    return build(s, (0.0, 4 * math.pi), beta0=BETA0_C)


@pytest.fixture(scope="session")
def scen_D():
    return build(make_preset("D", PARAMS_D), (0.0, 10.0), beta0=0.1j)


@pytest.fixture(scope="session")
def scen_general():
    return build(general_schedule(), (0.0, 10.0), beta0=0.2 - 0.1j)


@pytest.fixture(scope="session")
def scenarios(scen_A, scen_B, scen_C, scen_D):
    return {"A": scen_A, "B": scen_B, "C": scen_C, "D": scen_D}


# acceptance summary lines, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
