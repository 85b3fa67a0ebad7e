"""Bessel functions of real order and the generalized Bessel family.

Small arguments use the ascending series for J (summed in extended
precision) and an integral representation for Y. Large arguments use the
Hankel expansions truncated to ``N_TERMS`` terms.

The generalized equation

    t^2 x'' + t (2 - mu) x' + (t^2 - nu^2) x = 0

is solved by ``x = t**((mu - 1)/2) * B(t)`` where ``B`` is a Bessel function
of order ``nu_tilde = sqrt(((mu - 1)/2)**2 + nu**2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, roots_legendre

from .errors import DomainError

N_TERMS = 8
SERIES_RTOL = 1e-18
SERIES_CAP = 200
SWITCH_MIN = 20.0

KINDS = ("P", "Q", "R", "S")


@dataclass(frozen=True)
class BesselParams:
    """Problem instance for the generalized Bessel equation.

    Parameters
    ----------
    nu : float
        Order.
    mu : float
        Damping parameter.
    tau0, T : float
        Domain ``[tau0, T]`` with ``0 < tau0 < T``.
    """

    nu: float
    mu: float
    tau0: float = 10.0
    T: float = 200.0

    def __post_init__(self):
        for name in ("nu", "mu", "tau0", "T"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
        if not self.tau0 > 0:
            raise DomainError(f"tau0 must be positive, got {self.tau0}")
        if not self.T > self.tau0:
            raise DomainError(f"T must exceed tau0, got T={self.T}, tau0={self.tau0}")

    @property
    def nu_tilde(self) -> float:
        return math.hypot((self.mu - 1.0) / 2.0, self.nu)

    @property
    def alpha(self) -> float:
        """Envelope exponent ``(2 - mu)/2`` of ``r ~ phi**-alpha``."""
        return (2.0 - self.mu) / 2.0

    @property
    def analytic_dim(self) -> float | None:
        """Phase dimension ``4/(4 - mu)`` for ``0 < mu < 2``, else None."""
        if 0.0 < self.mu < 2.0:
            return 4.0 / (4.0 - self.mu)
        return None

    def with_range(self, tau0: float, T: float) -> "BesselParams":
        return BesselParams(self.nu, self.mu, tau0, T)


@dataclass(frozen=True)
class HankelSeries:
    """One of the truncated asymptotic series P, Q, R, S of order ``nu``."""

    nu: float
    n_terms: int = N_TERMS
    kind: str = "P"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if int(self.n_terms) != self.n_terms or self.n_terms < 1:
            raise DomainError(f"n_terms must be a positive integer, got {self.n_terms}")

    @property
    def coefficients(self) -> np.ndarray:
        return _hankel_coefficients(float(self.nu), int(self.n_terms), self.kind)


def pochhammer_coeff(nu: float, k: int) -> float:
    """Hankel coefficient ``(nu, k)``.

    ``prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (2^(2k) k!)``, equal to 1 for k = 0.
    """
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    return _product_coeff(nu, k, skip=None)


def _product_coeff(nu: float, k: int, skip: int | None) -> float:
    # (nu, k) with the j == skip factor removed; factors are interleaved with
    # the 1/(4 j) divisions to avoid overflow for large k
    mu4 = 4.0 * nu * nu
    val = 1.0
    for j in range(1, k + 1):
        if j != skip:
            val *= mu4 - (2 * j - 1) ** 2
        val /= 4.0 * j
    return val


@lru_cache(maxsize=256)
def _hankel_coefficients(nu: float, n_terms: int, kind: str) -> np.ndarray:
    mu4 = 4.0 * nu * nu
    c = np.empty(n_terms)
    for k in range(n_terms):
        sign = -1.0 if k % 2 else 1.0
        if kind == "P":
            c[k] = sign * _product_coeff(nu, 2 * k, None)
        elif kind == "Q":
            c[k] = sign * _product_coeff(nu, 2 * k + 1, None)
        elif kind == "R":
            if k == 0:
                c[k] = 1.0
            else:
                c[k] = sign * (mu4 + 16 * k * k - 1) * _product_coeff(nu, 2 * k, 2 * k)
        else:
            c[k] = sign * (mu4 + 4 * (2 * k + 1) ** 2 - 1) * _product_coeff(nu, 2 * k + 1, 2 * k + 1)
    c.setflags(write=False)
    return c


def _check_t(t):
    arr = np.asarray(t, dtype=float)
    if arr.size and not np.all(arr > 0):
        raise DomainError("argument t must be positive")
    return arr


def _hankel_sum(coef: np.ndarray, t: np.ndarray, odd: bool) -> np.ndarray:
    z = 1.0 / (2.0 * t)
    z2 = z * z
    acc = np.zeros_like(t)
    for c in coef[::-1]:
        acc = acc * z2 + c
    return acc * z if odd else acc


def hankel_eval(series: HankelSeries, t):
    """Evaluate a truncated P, Q, R or S series at ``t > 0``."""
    arr = _check_t(t)
    out = _hankel_sum(series.coefficients, arr, series.kind in ("Q", "S"))
    return float(out) if np.ndim(t) == 0 else out


def t_switch(nu: float) -> float:
    """Argument at and above which the Hankel branch is used."""
    return max(SWITCH_MIN, 2.0 * nu)


def _hankel_pair(nu: float, t: np.ndarray, kind: str):
    P = _hankel_sum(_hankel_coefficients(nu, N_TERMS, "P"), t, False)
    Q = _hankel_sum(_hankel_coefficients(nu, N_TERMS, "Q"), t, True)
    R = _hankel_sum(_hankel_coefficients(nu, N_TERMS, "R"), t, False)
    S = _hankel_sum(_hankel_coefficients(nu, N_TERMS, "S"), t, True)
    chi = t - (0.5 * nu + 0.25) * math.pi
    c, s = np.cos(chi), np.sin(chi)
    amp = np.sqrt(2.0 / (math.pi * t))
    if kind == "J":
        return amp * (P * c - Q * s), amp * (-R * s - S * c)
    return amp * (P * s + Q * c), amp * (R * c - S * s)


def _series_j(nu: float, t: np.ndarray):
    # ascending series for J_nu and J_nu' in extended precision
    x = np.asarray(t, dtype=np.longdouble)
    nul = np.longdouble(nu)
    h2 = -(x / 2) ** 2
    term = np.ones_like(x)
    total = np.ones_like(x)
    dtotal = np.full_like(x, nu)
    kmin = float(np.max(t)) / 2.0 if t.size else 0.0
    for k in range(SERIES_CAP):
        kl = np.longdouble(k + 1)
        term = term * h2 / (kl * (kl + nul))
        total = total + term
        dtotal = dtotal + term * (2 * kl + nul)
        if k > kmin and np.all(np.abs(term) <= SERIES_RTOL * np.abs(total)):
            break
    lead = np.exp(nu * np.log(t / 2.0) - gammaln(nu + 1.0))
    return lead * total.astype(float), lead * dtotal.astype(float) / t


@lru_cache(maxsize=64)
def _legendre(n: int):
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _integral_y(nu: float, t: np.ndarray):
    """Y_nu and Y_nu' from the integral representation

    Y_nu(x) = 1/pi int_0^pi sin(x sin th - nu th) dth
              - 1/pi int_0^inf (e^(nu s) + e^(-nu s) cos(nu pi)) e^(-x sinh s) ds
    """
    out_y = np.empty_like(t)
    out_dy = np.empty_like(t)
    if t.size == 0:
        return out_y, out_dy
    n = 48 + 2 * int(math.ceil(float(np.max(t)) + nu))
    gx, gw = _legendre(n)
    cpi = math.cos(nu * math.pi)
    for lo in range(0, t.size, 4096):
        x = t[lo:lo + 4096, None]
        th = 0.5 * math.pi * (gx + 1.0)
        arg = x * np.sin(th) - nu * th
        i1 = 0.5 * math.pi * (np.sin(arg) @ gw)
        d1 = 0.5 * math.pi * ((np.sin(th) * np.cos(arg)) @ gw)
        # truncate the second integral where the integrand is negligible
        xs = x[:, 0]
        speak = np.arccosh(np.maximum(nu / xs, 1.0))
        logpeak = nu * speak - xs * np.sinh(speak)
        a = speak.copy()
        b = np.full_like(xs, 60.0)
        for _ in range(60):
            m = 0.5 * (a + b)
            val = nu * m - xs * np.sinh(m) + np.log1p(np.sinh(m)) - logpeak + 46.0
            big = val > 0
            a = np.where(big, m, a)
            b = np.where(big, b, m)
        smax = b[:, None]
        s = 0.5 * smax * (gx + 1.0)
        e = np.exp(-x * np.sinh(s))
        f = (np.exp(nu * s) + cpi * np.exp(-nu * s)) * e
        i2 = 0.5 * smax[:, 0] * (f @ gw)
        d2 = 0.5 * smax[:, 0] * ((np.sinh(s) * f) @ gw)
        out_y[lo:lo + 4096] = (i1 - i2) / math.pi
        out_dy[lo:lo + 4096] = (d1 + d2) / math.pi
    return out_y, out_dy


def bessel_pair(nu: float, t, kind: str = "J"):
    """Return ``(B_nu(t), B_nu'(t))`` for ``B`` in {J, Y}; ``nu >= 0``."""
    if kind not in ("J", "Y"):
        raise DomainError(f"kind must be 'J' or 'Y', got {kind!r}")
    if not (math.isfinite(nu) and nu >= 0):
        raise DomainError(f"order must be finite and nonnegative, got {nu}")
    arr = _check_t(t)
    flat = np.atleast_1d(arr).ravel()
    val = np.empty_like(flat)
    der = np.empty_like(flat)
    big = flat >= t_switch(nu)
    if big.any():
        val[big], der[big] = _hankel_pair(nu, flat[big], kind)
    small = ~big
    if small.any():
        f = _series_j if kind == "J" else _integral_y
        val[small], der[small] = f(nu, flat[small])
    if np.ndim(t) == 0:
        return float(val[0]), float(der[0])
    return val.reshape(arr.shape), der.reshape(arr.shape)


def bessel_j(nu, t):
    """Bessel function of the first kind."""
    return bessel_pair(nu, t, "J")[0]


def bessel_y(nu, t):
    """Bessel function of the second kind."""
    return bessel_pair(nu, t, "Y")[0]


def bessel_j_prime(nu, t):
    return bessel_pair(nu, t, "J")[1]


def bessel_y_prime(nu, t):
    return bessel_pair(nu, t, "Y")[1]


def gen_bessel(params: BesselParams, kind: str, t):
    """Generalized Bessel function with its first two derivatives.

    Returns
    -------
    x, dx, ddx
        ``x = t**((mu-1)/2) B(t)``; ``ddx`` comes from the ODE itself.
    """
    b, db = bessel_pair(params.nu_tilde, t, kind)
    tt = np.asarray(t, dtype=float)
    m = 0.5 * (params.mu - 1.0)
    scale = tt ** m
    x = scale * b
    dx = scale * (db + m * b / tt)
    ddx = -(tt * (2.0 - params.mu) * dx + (tt * tt - params.nu ** 2) * x) / (tt * tt)
    if np.ndim(t) == 0:
        return float(x), float(dx), float(ddx)
    return x, dx, ddx


def x_plus_ddx(params: BesselParams, t, x, dx):
    """``x + x''`` rewritten through the ODE so no cancellation occurs."""
    tt = np.asarray(t, dtype=float)
    return params.nu ** 2 * x / (tt * tt) - (2.0 - params.mu) * dx / tt
