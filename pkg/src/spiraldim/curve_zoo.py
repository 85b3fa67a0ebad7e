"""Closed-form planar curves with known box dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .errors import DomainError
from .phase_curve import DEFAULT_STEP, CurveTrace, build_trace, refine_grid

FRESNEL_SWITCH = 6.0
FRESNEL_LIMIT = math.sqrt(math.pi / 8)
BUMP_WIDTH = 0.25


@dataclass(frozen=True)
class AnalyticCurve:
    kind: str
    params: dict = field(default_factory=dict)
    known_dim: float | None = None


def _polar_evaluator(rfun):
    # rfun(t) -> (r, r'); the angle is t itself
    def ev(t):
        t = np.asarray(t, dtype=float)
        r, dr = rfun(t)
        c, s = np.cos(t), np.sin(t)
        return r * c, r * s, dr * c - r * s, dr * s + r * c
    return ev


def _angle_grid(lo, hi, step):
    n = max(2, int(math.ceil((hi - lo) / (0.9 * step))) + 1)
    return np.linspace(lo, hi, n)


def _check_range(rng, name):
    lo, hi = map(float, rng)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise DomainError(f"{name} must be an increasing pair, got {rng}")
    return lo, hi


def power_spiral(alpha: float, m: float = 1.0, phi_range=(2 * math.pi, 2000 * math.pi),
                 step: float = DEFAULT_STEP) -> CurveTrace:
    """Spiral ``r = m phi**-alpha`` parametrized by its angle.

    The known dimension is ``2/(1 + alpha)`` for ``alpha <= 1`` and 1 beyond,
    in which case ``meta['rectifiable']`` is set.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    lo, hi = _check_range(phi_range, "phi_range")
    if lo <= 0:
        raise DomainError("phi_range must start above 0")

    def rfun(t):
        r = m * t ** -alpha
        return r, -alpha * r / t

    known = 2.0 / (1.0 + alpha) if alpha <= 1 else 1.0
    spec = AnalyticCurve("power_spiral", {"alpha": alpha, "m": m}, known)
    return build_trace(_angle_grid(lo, hi, step), _polar_evaluator(rfun), lambda t: rfun(np.asarray(t, float))[1],
                       spec, alpha=alpha, known_dim=known, meta={"rectifiable": alpha > 1})


def hopf_trajectory(phi_range=(2 * math.pi, 2000 * math.pi), step: float = DEFAULT_STEP) -> CurveTrace:
    """Trajectory ``r = (2 phi)**-1/2`` of the normal form with ``a0 = 0``."""
    tr = power_spiral(0.5, 1.0 / math.sqrt(2.0), phi_range, step)
    spec = AnalyticCurve("hopf", {"a0": 0.0}, 4.0 / 3.0)
    return _retag(tr, spec)


def circle(radius: float = 1.0, turns: float = 1.0, step: float = DEFAULT_STEP) -> CurveTrace:
    if not radius > 0:
        raise DomainError("radius must be positive")

    def rfun(t):
        return np.full_like(t, radius), np.zeros_like(t)

    spec = AnalyticCurve("circle", {"radius": radius}, 1.0)
    return build_trace(_angle_grid(0.0, 2 * math.pi * turns, step), _polar_evaluator(rfun),
                       lambda t: np.zeros_like(np.asarray(t, float)), spec, alpha=0.0, known_dim=1.0)


def segment(length: float = 1.0, height: float = 0.5, n: int = 257) -> CurveTrace:
    """Horizontal segment ``y = height`` centred on the y-axis."""
    if not (length > 0 and height > 0):
        raise DomainError("length and height must be positive")

    def ev(t):
        t = np.asarray(t, dtype=float)
        return t, np.full_like(t, height), np.ones_like(t), np.zeros_like(t)

    def rd(t):
        t = np.asarray(t, dtype=float)
        return t / np.hypot(t, height)

    spec = AnalyticCurve("segment", {"length": length, "height": height}, 1.0)
    return build_trace(np.linspace(-length / 2, length / 2, n), ev, rd, spec, known_dim=1.0)


def _retag(tr: CurveTrace, spec: AnalyticCurve) -> CurveTrace:
    from dataclasses import replace
    return replace(tr, params=spec, known_dim=spec.known_dim)


# Fresnel integrals ---------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = roots_legendre(20)
_PANEL = 0.25


def _gl_integral(a, b):
    """Composite-free 20-point Gauss-Legendre of exp(i s^2) over [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    s = mid[:, None] + half[:, None] * _GL_NODES
    return half * (np.exp(1j * s * s) @ _GL_WEIGHTS)


def _panel_table():
    edges = np.arange(0.0, FRESNEL_SWITCH + _PANEL, _PANEL)
    inc = _gl_integral(edges[:-1], edges[1:])
    return edges, np.concatenate([[0.0], np.cumsum(inc)])


_EDGES, _CUM = _panel_table()


def _fresnel_small(t):
    j = np.minimum((t / _PANEL).astype(np.int64), _EDGES.size - 2)
    return _CUM[j] + _gl_integral(_EDGES[j], t)


def _fresnel_tail(t):
    """``(C - c) + i (S - c)`` for large t from the asymptotic series."""
    z = 1.0 / (2j * t * t)
    term = np.ones_like(t, dtype=complex)
    acc = term.copy()
    live = np.ones(t.shape, dtype=bool)
    for k in range(1, 60):
        nxt = term * (2 * k - 1) * z
        grow = np.abs(nxt) >= np.abs(term)
        live &= ~grow
        term = np.where(live, nxt, term)
        acc = acc + np.where(live, nxt, 0)
        live &= np.abs(nxt) > 1e-17
        if not live.any():
            break
    return np.exp(1j * t * t) / (2j * t) * acc


def _fresnel_complex_offset(t):
    """``C(t) - c + i (S(t) - c)`` for ``t >= 0``."""
    out = np.empty(t.shape, dtype=complex)
    small = t < FRESNEL_SWITCH
    if small.any():
        out[small] = _fresnel_small(t[small]) - FRESNEL_LIMIT * (1 + 1j)
    if (~small).any():
        out[~small] = _fresnel_tail(t[~small])
    return out


def fresnel(t):
    """``C(t) = int_0^t cos(s^2) ds`` and ``S(t) = int_0^t sin(s^2) ds``.

    Gauss-Legendre panels below ``t = 6``, the asymptotic expansion above;
    odd in ``t``.
    """
    arr = np.asarray(t, dtype=float)
    a = np.abs(np.atleast_1d(arr))
    z = _fresnel_complex_offset(a) + FRESNEL_LIMIT * (1 + 1j)
    sgn = np.sign(np.atleast_1d(arr))
    C, S = sgn * z.real, sgn * z.imag
    if arr.ndim == 0:
        return float(C[0]), float(S[0])
    return C.reshape(arr.shape), S.reshape(arr.shape)


def clothoid(t_range=(3.0, 300.0), step: float = DEFAULT_STEP) -> CurveTrace:
    """Euler spiral ``(C(t), S(t))`` shifted so its limit point is the origin."""
    lo, hi = _check_range(t_range, "t_range")
    if lo <= 0:
        raise DomainError("t_range must lie in t > 0")

    def ev(t):
        t = np.asarray(t, dtype=float)
        z = _fresnel_complex_offset(t)
        return z.real, z.imag, np.cos(t * t), np.sin(t * t)

    def rd(t):
        x, y, vx, vy = ev(t)
        return (x * vx + y * vy) / np.hypot(x, y)

    # the angle advances like t^2, so sample uniformly in t^2
    u = _angle_grid(lo * lo, hi * hi, step)
    t = refine_grid(np.sqrt(u), ev, step)
    t[0], t[-1] = lo, hi
    spec = AnalyticCurve("clothoid", {}, 4.0 / 3.0)
    return build_trace(t, ev, rd, spec, alpha=0.5, known_dim=4.0 / 3.0,
                       meta={"angle_exponent": 2.0})


# Synthetic wavy spirals ----------------------------------------------------

def synthetic_wavy(alpha: float, wave_amp: float = 1.0, decay_beta: float | None = None,
                   t_range=(2 * math.pi, 2000 * math.pi), step: float = DEFAULT_STEP,
                   shape: str = "bump", width: float = BUMP_WIDTH) -> CurveTrace:
    """Spiral ``r = t**-alpha (1 + wave_amp t**-(beta - alpha) w(t))`` with ``phi = t``.

    ``shape='bump'`` uses ``w = exp(-s^2)`` with ``s = ((t mod 2 pi) - pi)/(width t**-kappa)``
    and ``kappa = max(beta - alpha - 1, 0)``: the bump narrows just fast enough
    for each period to keep one positive-``r'`` window, and the oscillation of
    ``r`` over a window scales like ``t**-beta``. ``shape='sine'`` uses
    ``w = sin t``.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if wave_amp < 0:
        raise DomainError("wave_amp must be nonnegative")
    if decay_beta is None:
        decay_beta = alpha + 2.0
    if not decay_beta > 0:
        raise DomainError("decay_beta must be positive")
    if shape not in ("bump", "sine"):
        raise DomainError(f"unknown shape {shape!r}")
    lo, hi = _check_range(t_range, "t_range")
    if lo <= 0:
        raise DomainError("t_range must lie in t > 0")
    gamma = decay_beta - alpha
    kappa = max(gamma - 1.0, 0.0)
    if shape == "sine" and wave_amp * lo ** -gamma >= 1:
        raise DomainError("perturbation destroys positivity of r")

    def wave(t):
        if shape == "sine":
            return np.sin(t), np.cos(t)
        h = width * t ** -kappa
        s = (np.mod(t, 2 * math.pi) - math.pi) / h
        w = np.exp(-s * s)
        ds = 1.0 / h + kappa * s / t
        return w, -2.0 * s * ds * w

    def rfun(t):
        w, dw = wave(t)
        amp = wave_amp * t ** -gamma
        base = t ** -alpha
        r = base * (1.0 + amp * w)
        dr = -alpha * r / t + base * amp * (dw - gamma * w / t)
        return r, dr

    t = _angle_grid(lo, hi, step)
    if shape == "bump" and wave_amp > 0:
        k = np.arange(math.floor(lo / (2 * math.pi)), math.ceil(hi / (2 * math.pi)) + 1)
        centres = 2 * math.pi * k + math.pi
        local = (centres[:, None] + (width * centres[:, None] ** -kappa) * np.linspace(-4, 4, 49)).ravel()
        local = local[(local > lo) & (local < hi)]
        t = np.unique(np.concatenate([t, local]))
        # drop near-coincident grid and local nodes
        t = t[np.concatenate([[True], np.diff(t) > 1e-9 * t[1:]])]
    known = 2.0 / (1.0 + alpha)
    spec = AnalyticCurve("synthetic_wavy", {"alpha": alpha, "wave_amp": wave_amp, "decay_beta": decay_beta,
                                            "shape": shape, "width": width}, known)
    return build_trace(t, _polar_evaluator(rfun), lambda tt: rfun(np.asarray(tt, float))[1], spec,
                       alpha=alpha, known_dim=known)
