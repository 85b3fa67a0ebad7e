"""Numeric checks of the auxiliary inequalities behind the dimension results.

Each oracle evaluates one inequality at a point; the ``*_suite`` helpers
sample the domain with a fixed seed and count failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BoundViolation, DomainError, MultiplicityError, NoRootError
from .phase_curve import CurveTrace

SLACK = 1e-12
POLE_GUARD = 1e-8
SCAN_POINTS = 4000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class PropertySample:
    inputs: tuple
    lhs: float
    rhs: float
    passed: bool


def _le(lhs, rhs):
    return lhs <= rhs + SLACK * max(1.0, abs(rhs))


def isosceles_inequality(theta: float, R: float) -> PropertySample:
    """``theta R <= (pi/2) |XY|`` for legs of length R meeting at angle theta."""
    if not 0 <= theta <= math.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    if not R > 0:
        raise DomainError(f"R must be positive, got {R}")
    lhs = theta * R
    rhs = 0.5 * math.pi * 2 * R * math.sin(theta / 2)
    return PropertySample((theta, R), lhs, rhs, _le(lhs, rhs))


def _reduce(t):
    # representative of t in (-pi/2, pi/2] modulo pi
    return t - math.pi * math.floor(t / math.pi + 0.5)


def _at_pole(t):
    return abs(math.cos(t)) < POLE_GUARD


def tan_perturbation(a: float, t: float, branch: str = "plus"):
    """Solve ``(1 + a) tan t = tan(t + y)`` or ``(1 - a) tan t = tan(t - y)``.

    ``y`` is taken in the period of ``t``. Returns ``(y, bound)`` with bound
    ``pi a / 2`` for the plus branch and ``pi a`` for the minus branch, and
    raises ``BoundViolation`` if ``|y|`` exceeds it.
    """
    if branch == "plus":
        if not a > 0:
            raise DomainError(f"a must be positive, got {a}")
        bound = 0.5 * math.pi * a
    elif branch == "minus":
        if not 0 < a < 0.5:
            raise DomainError(f"a must lie in (0, 1/2), got {a}")
        bound = math.pi * a
    else:
        raise DomainError(f"unknown branch {branch!r}")
    if _at_pole(t):
        return 0.0, bound
    s = _reduce(t)
    if branch == "plus":
        y = math.atan((1 + a) * math.tan(s)) - s
    else:
        y = s - math.atan((1 - a) * math.tan(s))
    if not _le(abs(y), bound):
        raise BoundViolation(f"|y| = {abs(y)} exceeds {bound} at a={a}, t={t}")
    return y, bound


def additive_tan_shift(f_val: float, t: float) -> float:
    """Solve ``f_val + tan t = tan(t + y)`` in the period of ``t``; ``|y| <= |f_val|``."""
    if _at_pole(t):
        return 0.0
    s = _reduce(t)
    y = math.atan(f_val + math.tan(s)) - s
    if not _le(abs(y), abs(f_val)):
        raise BoundViolation(f"|y| = {abs(y)} exceeds |f| = {abs(f_val)} at t={t}")
    return y


def _cot_form(a):
    # sin z (cot z - a z), free of poles on the closed window
    return lambda z: np.cos(z) - a * z * np.sin(z)


def cot_sign_changes(slope_a: float, window_k: int, n: int = SCAN_POINTS) -> int:
    """Number of sign changes of ``cot z - a z`` on a grid inside ``(k pi, (k+1) pi)``."""
    lo, hi = window_k * math.pi, (window_k + 1) * math.pi
    z = np.linspace(lo, hi, n + 2)[1:-1]
    v = np.sign(_cot_form(slope_a)(z) * np.sign(np.sin(z)))
    # cot z - a z tends to +inf at k pi and to -inf at (k+1) pi
    v = np.concatenate([[1.0], v[v != 0], [-1.0]])
    return int(np.count_nonzero(v[1:] != v[:-1]))


def unique_cot_root(slope_a: float, window_k: int) -> float:
    """The root of ``cot z = a z`` in ``(k pi, (k+1) pi)`` for ``a < 0``."""
    if not slope_a < 0:
        raise DomainError(f"slope_a must be negative, got {slope_a}")
    if window_k < 0:
        raise DomainError(f"window_k must be nonnegative, got {window_k}")
    m = cot_sign_changes(slope_a, window_k)
    if m > 1:
        raise MultiplicityError(f"{m} sign changes in window {window_k}")
    if m == 0:
        raise NoRootError(f"no sign change in window {window_k}")
    h = _cot_form(slope_a)
    lo, hi = window_k * math.pi, (window_k + 1) * math.pi
    return brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def cot_k0(slope_a: float, k_max: int = 200) -> int:
    """First window index from which 50 consecutive windows hold a single root."""
    run = 0
    for k in range(k_max + 50):
        run = run + 1 if cot_sign_changes(slope_a, k, 800) == 1 else 0
        if run == 50:
            return k - 49
    raise NoRootError(f"roots never become unique below window {k_max}")


def phase_asymptotic_check(trace: CurveTrace, tail: float = 0.5, power: float = 1.0) -> float:
    """``sup |theta(t) - chi(t) - k pi| t**power`` over the tail of a Bessel trace.

    ``theta`` is the oriented phase angle and ``k`` the integer minimizing
    the supremum.
    """
    p = trace.params
    if not hasattr(p, "nu_tilde"):
        raise DomainError("phase check needs a generalized Bessel trace")
    chi = trace.t - (p.nu_tilde / 2 + 0.25) * math.pi
    if trace.kind == "Y":
        chi = chi - 0.5 * math.pi
    res = trace.theta() - chi
    keep = trace.t >= trace.t[0] + (1 - tail) * (trace.t[-1] - trace.t[0])
    res, t = res[keep], trace.t[keep]
    k0 = round(float(np.median(res)) / math.pi)
    best = min(float(np.max(np.abs(res - k * math.pi) * t ** power)) for k in (k0 - 1, k0, k0 + 1))
    return best


# randomized suites -------------------------------------------------------------

def triangle_suite(n: int = 100_000, seed: int = DEFAULT_SEED) -> int:
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, math.pi, n)
    R = 10 ** rng.uniform(-3, 3, n)
    return sum(not isosceles_inequality(a, b).passed for a, b in zip(th.tolist(), R.tolist()))


def tan_suite(n: int = 10_000, seed: int = DEFAULT_SEED) -> dict:
    """Failure counts per branch; a failure is a raised ``BoundViolation``."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(-20, 20, (3, n))
    out = {}
    cases = {
        "plus": (rng.uniform(0, 5, n), lambda a, s: tan_perturbation(a, s, "plus")),
        "minus": (rng.uniform(0, 0.5, n), lambda a, s: tan_perturbation(a, s, "minus")),
        "additive": (rng.uniform(-3, 3, n), additive_tan_shift),
    }
    for row, (name, (a, fn)) in enumerate(cases.items()):
        bad = 0
        for ai, ti in zip(a.tolist(), t[row].tolist()):
            if name != "additive" and ai == 0:
                continue
            try:
                fn(ai, ti)
            except BoundViolation:
                bad += 1
        out[name] = bad
    return out


def cot_suite(n: int = 50, seed: int = DEFAULT_SEED) -> int:
    """Failures among random windows past ``k0``: missing, multiple or inexact roots."""
    rng = np.random.default_rng(seed)
    a = -(10 ** rng.uniform(-1, 1, n))
    off = rng.integers(0, 51, n)
    bad = 0
    for ai, oi in zip(a.tolist(), off.tolist()):
        k = cot_k0(ai) + int(oi)
        try:
            z = unique_cot_root(ai, k)
        except (MultiplicityError, NoRootError):
            bad += 1
            continue
        if not (k * math.pi < z < (k + 1) * math.pi) or abs(_cot_form(ai)(z)) > 1e-12 * max(1.0, abs(ai * z)):
            bad += 1
    return bad
