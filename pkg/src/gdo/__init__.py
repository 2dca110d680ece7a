"""Exact quantum states of the generalized driven oscillator.

Pipeline: schedule -> classical -> invariant -> driving -> wavefunction,
with geometric (cyclic states, Berry phase) and oracle (Crank-Nicolson)
on top.
"""

__version__ = "0.1.0"

from .schedule import ParameterSchedule, make_preset, from_tables, validate  # noqa: E402
from .classical import solve_classical, check_periodicity  # noqa: E402
from .invariant import build_invariant, check_invariant_odes  # noqa: E402
from .driving import solve_beta, check_linear_odes  # noqa: E402
from .wavefunction import eval_psi, alpha_phase, eigen_residual, moments  # noqa: E402
from .geometric import cis_conditions, berry_phase, h_coefficients  # noqa: E402
from .oracle import propagate, fidelity_sweep  # noqa: E402

__all__ = [
    "ParameterSchedule", "make_preset", "from_tables", "validate",
    "solve_classical", "check_periodicity", "build_invariant", "check_invariant_odes",
    "solve_beta", "check_linear_odes", "eval_psi", "alpha_phase", "eigen_residual",
    "moments", "cis_conditions", "berry_phase", "h_coefficients", "propagate",
    "fidelity_sweep",
]
