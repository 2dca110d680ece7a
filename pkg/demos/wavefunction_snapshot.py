"""Moments of the exact states of a pulsating, damped oscillator.

Run with ``python3 demos/wavefunction_snapshot.py [out.csv]``. Compares grid
moments with the closed forms and optionally writes one snapshot as CSV.
"""

import sys

from gdo.classical import solve_classical
from gdo.driving import solve_beta
from gdo.invariant import build_invariant
from gdo.schedule import make_preset
from gdo.wavefunction import eval_psi, exact_moments, moments

sched = make_preset("D", {"m0": 1.0, "Omega": 1.0, "gamma": 0.05, "mu": 0.2, "nu": 1.5,
                          "f0": 0.4, "omega_d": 1.7})
inv = build_invariant(solve_classical(sched, (0.0, 10.0)))
ds = solve_beta(inv, beta0=0.1j)

print(f"{'n':>2} {'t':>5} {'<q>':>10} {'var q':>10} {'var q exact':>12} {'var p':>10} {'var p exact':>12}")
for t in (1.0, 5.0, 9.0):
    for n in (0, 1, 4):
        mq, vq, _, vp = moments(eval_psi(n, inv, ds, t=t))
        _, eq, _, ep = exact_moments(n, inv, ds, t)
        print(f"{n:>2} {t:5.1f} {mq:10.5f} {vq:10.6f} {eq:12.6f} {vp:10.6f} {ep:12.6f}")

if len(sys.argv) > 1:
    eval_psi(1, inv, ds, t=5.0).to_csv(sys.argv[1], scenario="D")
    print("wrote", sys.argv[1])
