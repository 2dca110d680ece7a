"""Dense two-sided ODE integration around a reference time."""

import numpy as np
from scipy.integrate import solve_ivp


class SolverError(RuntimeError):
    pass


class DenseSolution:
    """Dense output over ``window`` for an initial value posed at ``t0``.

    When ``t0`` lies strictly inside the window the problem is integrated
    forward and backward separately and the two pieces are glued at ``t0``.
    """

    def __init__(self, rhs, t0, y0, window, rtol, atol, method="DOP853"):
        a, b = float(window[0]), float(window[1])
        if not a <= t0 <= b:
            raise ValueError(f"reference time {t0} outside window [{a}, {b}]")
        self.t0 = float(t0)
        self.window = (a, b)
        self.y0 = np.asarray(y0, dtype=float)
        self._fwd = self._bwd = None
        self.nfev = 0
        if b > t0:
            self._fwd = self._solve(rhs, t0, b, rtol, atol, method)
        if a < t0:
            self._bwd = self._solve(rhs, t0, a, rtol, atol, method)

    def _solve(self, rhs, t0, t1, rtol, atol, method):
        res = solve_ivp(rhs, (t0, t1), self.y0, method=method, rtol=rtol,
                        atol=atol, dense_output=True)
        if not res.success:
            raise SolverError(f"ODE integration from {t0} to {t1} failed: {res.message}")
        if not np.all(np.isfinite(res.y[:, -1])):
            raise SolverError(f"ODE solution blew up between {t0} and {t1}")
        self.nfev += res.nfev
        return res.sol

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a, b = self.window
        span = b - a
        if np.any(t < a - 1e-12 * span) or np.any(t > b + 1e-12 * span):
            raise ValueError(f"time outside solution window [{a}, {b}]")
        flat = np.atleast_1d(t).ravel()
        out = np.empty((self.y0.size, flat.size))
        fwd = flat >= self.t0
        if np.any(fwd):
            out[:, fwd] = self._fwd(flat[fwd]) if self._fwd is not None else self.y0[:, None]
        if np.any(~fwd):
            out[:, ~fwd] = self._bwd(flat[~fwd])
        return out.reshape((self.y0.size,) + t.shape)
