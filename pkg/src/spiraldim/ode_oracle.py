"""Adaptive Runge-Kutta integration of the generalized Bessel equation.

Serves as an oracle independent of the series and asymptotic code in
``special_functions``. The equation is written as the first-order system

    x' = v,    v' = -[(2 - mu) t v + (t^2 - nu^2) x] / t^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationError
from .special_functions import BesselParams

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class OdeState:
    t: float
    x: float
    dx: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"t must be positive, got {self.t}")


class OdeSolution:
    """Accepted steps of one (possibly batched) integration with dense output.

    Attributes
    ----------
    t : ndarray, shape (m,)
        Accepted step ends, strictly increasing.
    x, dx : ndarray, shape (m,) or (m, n)
        State at ``t``; the second axis indexes batch members.
    """

    def __init__(self, sol, batch: bool):
        self._sol = sol
        self._batch = batch
        y = sol.y
        n = y.shape[0] // 2
        self.t = sol.t
        self.x = y[:n].T if batch else y[0]
        self.dx = y[n:].T if batch else y[1]

    def __len__(self):
        return self.t.size

    @property
    def states(self) -> list[OdeState]:
        if self._batch:
            raise TypeError("states is defined for scalar integrations only")
        return [OdeState(float(a), float(b), float(c)) for a, b, c in zip(self.t, self.x, self.dx)]

    @property
    def final(self):
        return self.x[-1], self.dx[-1]

    def __call__(self, t):
        """Interpolated ``(x, dx)`` at ``t`` (4th-order dense output)."""
        y = self._sol.sol(t)
        n = y.shape[0] // 2
        if self._batch:
            return y[:n], y[n:]
        return y[0], y[1]


def _rhs(nu2, c):
    def f(t, y):
        n = y.shape[0] // 2
        x, v = y[:n], y[n:]
        return np.concatenate([v, -(c * v) / t - (1.0 - nu2 / (t * t)) * x])
    return f


def _solve(nu, mu, x0, dx0, t0, t_end, tol):
    if not 1e-14 < tol < 1e-3:
        raise DomainError(f"tol must lie in (1e-14, 1e-3), got {tol}")
    if not t0 > 0:
        raise DomainError(f"initial t must be positive, got {t0}")
    if not t_end > t0:
        raise DomainError(f"t_end must exceed the initial t, got {t_end} <= {t0}")
    nu = np.asarray(nu, dtype=float)
    mu = np.asarray(mu, dtype=float)
    y0 = np.concatenate([np.atleast_1d(x0), np.atleast_1d(dx0)]).astype(float)
    if not np.all(np.isfinite(y0)):
        raise IntegrationError("non-finite initial state")
    amp = float(np.max(np.abs(y0))) if y0.size else 0.0
    atol = tol * (amp if amp > 0 else 1.0)
    sol = solve_ivp(
        _rhs(nu * nu, 2.0 - mu), (t0, t_end), y0, method="RK45",
        rtol=tol, atol=atol, dense_output=True,
    )
    if sol.status != 0:
        raise IntegrationError(f"integration failed: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationError("non-finite state encountered")
    return sol


def integrate(params: BesselParams, init: OdeState, t_end: float, tol: float = DEFAULT_TOL) -> OdeSolution:
    """Integrate from ``init`` to ``t_end`` with local error control ``tol``."""
    sol = _solve(params.nu, params.mu, init.x, init.dx, init.t, t_end, tol)
    return OdeSolution(sol, batch=False)


def integrate_batch(nu, mu, x0, dx0, t0: float, t_end: float, tol: float = DEFAULT_TOL) -> OdeSolution:
    """Integrate many independent (nu, mu) instances on a shared step sequence.

    The step size is controlled by the worst member, so each member is
    integrated at least as accurately as it would be alone.
    """
    nu, mu, x0, dx0 = np.broadcast_arrays(*(np.atleast_1d(np.asarray(a, float)) for a in (nu, mu, x0, dx0)))
    sol = _solve(nu, mu, x0, dx0, t0, t_end, tol)
    return OdeSolution(sol, batch=True)
