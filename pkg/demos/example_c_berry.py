"""Forced oscillator with a rational frequency ratio: cyclic states and their Berry phase.

Run with ``python3 demos/example_c_berry.py``. Prints theta_0 and sigma_0 for a
few candidate periods, then the Berry phase from both routes for n = 0..5.
"""

import math

from gdo.classical import solve_classical
from gdo.driving import solve_beta
from gdo.geometric import berry_phase, cis_conditions
from gdo.invariant import build_invariant
from gdo.schedule import make_preset

sched = make_preset("C", {"m": 1.0, "omega": 3.0, "F0": 0.7, "r": 3, "r_e": 2})
basis = solve_classical(sched, (0.0, 4 * math.pi))
inv = build_invariant(basis)
ds = solve_beta(inv, beta0=0.1 + 0.2j)
print(f"omega_I = {inv.omega_I:.12f}")

# the drive period is pi, but beta only closes after two of them
for tau in (math.pi, 2 * math.pi):
    rep = cis_conditions(inv, ds, tau=tau, t_start=0.0)
    print(f"tau = {tau:.6f}: theta0/2pi = {rep.theta0 / (2 * math.pi):.9f}, "
          f"|sigma0| = {abs(rep.sigma0):.2e}, cyclic = {rep.is_cis} {list(rep.reasons)}")

rep = cis_conditions(inv, ds, tau=2 * math.pi, t_start=0.0)
print(f"\n{'n':>2} {'Gamma (quadrature)':>20} {'Gamma (chi + <H>)':>20} {'discrepancy':>12}")
for n in range(6):
    bp = berry_phase(n, inv, ds, report=rep)
    print(f"{n:>2} {bp.gamma:20.12f} {bp.gamma_reconstructed:20.12f} {bp.discrepancy:12.2e}")
print("partial integrals:", {k: round(v, 11) for k, v in bp.partials.items()})
