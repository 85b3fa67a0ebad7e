"""Wave detection for radius functions of spiral traces.

A wave starts where ``r'`` turns positive after a stretch with ``r' <= 0``
(odd index ``t_{2k+1}``) and ends where ``r`` first returns to the level it
had at the start (even index ``t_{2k+2}``). A spiral is classified as wavy
when the waves persist to the end of the trace with gaps bounded below and
their oscillation decays faster than ``t**-(alpha + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import roots_legendre

from .errors import BracketError, DomainError, InsufficientWavesError, NoRootError
from .phase_curve import CurveTrace
from .special_functions import N_TERMS, BesselParams, _hankel_coefficients

DEFAULT_TOL = 1e-10
DECAY_MARGIN = 0.25
EPS_THRESHOLD = math.pi / 3
MIN_PAIRS = 8
STABLE_RUN = 3
STABLE_REL = 0.05
WAVE_DELTA = math.pi / 3

_GX, _GW = roots_legendre(32)


@dataclass
class WavinessReport:
    t_sequence: list
    eps_min: float
    alpha: float | None
    osc_values: list
    decay_exponent_fit: float = float("nan")
    is_wavy: bool = False
    k0_used: int | None = None
    start_shift: float = 0.0
    checks: dict = field(default_factory=dict)

    @property
    def n_pairs(self) -> int:
        return len(self.osc_values)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["osc_values"] = [[float(a), float(b)] for a, b in self.osc_values]
        d["t_sequence"] = [float(v) for v in self.t_sequence]
        return d


def _integral(f, a, b):
    """Gauss-Legendre integral of a smooth vectorized ``f`` over ``[a, b]``."""
    if b <= a:
        return 0.0
    h = 0.5 * (b - a)
    return float(h * (f(0.5 * (a + b) + h * _GX) @ _GW))


class _Events:
    """Rises and falls of ``r'`` located from samples and hidden maxima."""

    def __init__(self, trace: CurveTrace, tol: float):
        self.trace = trace
        self.tol = tol
        f = trace.rdot_fn
        self.f = lambda s: float(f(np.array([s], dtype=float))[0])
        t = trace.t
        rd = trace.rdot
        rises, falls = [], []
        up = np.nonzero((rd[:-1] <= 0) & (rd[1:] > 0))[0]
        down = np.nonzero((rd[:-1] > 0) & (rd[1:] <= 0))[0]
        rises += [(t[i], t[i + 1]) for i in up]
        falls += [(t[i], t[i + 1]) for i in down]
        # narrow windows can hide between samples near local maxima of r'
        inner = np.arange(1, t.size - 1)
        peak = inner[(rd[inner] >= rd[inner - 1]) & (rd[inner] >= rd[inner + 1]) & (rd[inner] <= 0)
                     & (rd[inner - 1] <= 0) & (rd[inner + 1] <= 0)]
        for i in peak:
            a, b = t[i - 1], t[i + 1]
            res = minimize_scalar(lambda s: -self.f(s), bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-12 * max(1.0, abs(b))})
            tm = float(res.x)
            if -res.fun > 0:
                rises.append((a, tm))
                falls.append((tm, b))
        self.rises = sorted(rises)
        self.falls = sorted(falls)
        self._rise_lo = np.array([a for a, _ in self.rises])
        self._fall_lo = np.array([a for a, _ in self.falls])
        self._fall_roots = {}

    def root(self, a, b):
        fa, fb = self.f(a), self.f(b)
        if fa == 0:
            return a
        if fb == 0:
            return b
        if (fa > 0) == (fb > 0):
            raise BracketError(f"r' has no sign change on [{a}, {b}]; refine the trace")
        return brentq(self.f, a, b, xtol=self.tol, rtol=4 * np.finfo(float).eps, maxiter=200)

    def next_rise(self, after):
        """First upward zero of r' strictly after ``after``."""
        k = max(0, int(np.searchsorted(self._rise_lo, after)) - 1)
        for a, b in self.rises[k:]:
            if b <= after:
                continue
            lo = max(a, after)
            if self.f(lo) > 0:
                # already positive at `after`: r' must first drop to <= 0
                continue
            return self.root(lo, b)
        return None

    def falls_between(self, a, b):
        k = max(0, int(np.searchsorted(self._fall_lo, a)) - 1)
        out = []
        for lo, hi in self.falls[k:]:
            if lo >= b:
                break
            if hi <= a:
                continue
            if lo >= a and hi <= b:
                key = (lo, hi)
                if key not in self._fall_roots:
                    self._fall_roots[key] = self.root(lo, hi)
                out.append(self._fall_roots[key])
            else:
                out.append(self.root(max(lo, a), min(hi, b)))
        return out


def _march(ev: _Events, t_odd: float, nodes, stops):
    fv = ev.trace.rdot_fn
    g, osc, prev = 0.0, 0.0, t_odd
    for s in nodes:
        gs = g + _integral(fv, prev, s)
        if s in stops:
            osc = max(osc, gs)
        if gs <= 0 and (g > 0 or osc > 0):
            a, ga = prev, g
            root = brentq(lambda z: ga + _integral(fv, a, z), a, s, xtol=ev.tol,
                          rtol=4 * np.finfo(float).eps, maxiter=200)
            return root, max(osc, g)
        g, prev = gs, s
    return None, osc


def _level_return(ev: _Events, t_odd: float, look: int = 64):
    """First ``s > t_odd`` with ``r(s) = r(t_odd)`` and the largest rise of ``r`` before it.

    ``r(s) - r(t_odd)`` is accumulated by quadrature of ``r'`` over the
    sample intervals, split at the falls of ``r'``.
    """
    t = ev.trace.t
    i = int(np.searchsorted(t, t_odd, side="right"))
    for j in (min(t.size, i + look), t.size):
        local = t[i:j]
        end = local[-1] if local.size else t_odd
        stops = set(ev.falls_between(t_odd, end))
        root, osc = _march(ev, t_odd, sorted(stops | set(local.tolist())), stops)
        if root is not None or j == t.size:
            return root, osc
    return None, 0.0


def detect_sequence(trace: CurveTrace, tol_root: float = DEFAULT_TOL) -> WavinessReport:
    """Locate wave starts ``t_{2k+1}`` and level returns ``t_{2k+2}``.

    If ``r' > 0`` at the first sample, ``t_0`` is moved to the first zero
    of ``r'`` and the shift is recorded in ``start_shift``.
    """
    if not 1e-14 < tol_root < 1e-6:
        raise DomainError(f"tol_root must lie in (1e-14, 1e-6), got {tol_root}")
    ev = _Events(trace, tol_root)
    t0 = trace.t_start
    shift = 0.0
    if trace.rdot[0] > 0:
        nonpos = np.nonzero(trace.rdot <= 0)[0]
        if nonpos.size == 0:
            return WavinessReport([t0], math.inf, trace.alpha, [], start_shift=math.nan)
        i = int(nonpos[0])
        t0 = ev.root(trace.t[i - 1], trace.t[i])
        shift = t0 - trace.t_start
    seq = [t0]
    osc_values = []
    while True:
        t_odd = ev.next_rise(seq[-1])
        if t_odd is None:
            break
        t_even, osc = _level_return(ev, t_odd)
        if t_even is None:
            break
        seq += [t_odd, t_even]
        osc_values.append((t_odd, osc))
    gaps = [seq[2 * k + 1] - seq[2 * k] for k in range(1, len(osc_values))]
    eps_min = min(gaps) if gaps else math.inf
    return WavinessReport(seq, eps_min, trace.alpha, osc_values, start_shift=shift)


def stable_index(seq) -> int | None:
    """First pair index from which the waves are in their asymptotic regime.

    From ``k0`` on, the wave spacing ``t_{2k+1} - t_{2k-1}`` changes by under
    5% per step and every wave lasts less than ``WAVE_DELTA``. At least 3
    pairs must remain, otherwise None.
    """
    s = np.asarray(seq)
    n = (s.size - 1) // 2
    if n < STABLE_RUN + 2:
        return None
    odd = s[1:2 * n:2]
    dur = s[2:2 * n + 1:2] - odd
    g = np.diff(odd)
    ok = dur < WAVE_DELTA
    ok[:2] = False
    ok[2:] &= np.abs(np.diff(g)) / g[:-1] < STABLE_REL
    bad = np.nonzero(~ok)[0]
    k = int(bad[-1]) + 1
    return k if n - k >= STABLE_RUN else None


def check_waviness(report: WavinessReport, trace: CurveTrace, margin: float = DECAY_MARGIN,
                   eps_threshold: float = EPS_THRESHOLD, alpha: float | None = None) -> WavinessReport:
    """Test conditions (i)-(iii) on a detected sequence.

    (i) the sequence increases and runs to the end of the trace; (ii) the
    gaps ``t_{2k+1} - t_{2k}`` for ``k >= k0`` stay above ``eps_threshold``;
    (iii) the fitted decay exponent of the oscillations exceeds
    ``alpha + 1 + margin``. An empty sequence is not wavy.
    """
    alpha = report.alpha if alpha is None else alpha
    if report.n_pairs == 0:
        report.is_wavy = False
        report.checks = {"reason": "no waves"}
        return report
    if report.n_pairs < MIN_PAIRS:
        raise InsufficientWavesError(f"{report.n_pairs} wave pairs found, need {MIN_PAIRS}")
    if alpha is None:
        raise DomainError("alpha is unknown; pass it explicitly")
    seq = np.asarray(report.t_sequence)
    k0 = stable_index(report.t_sequence)
    report.k0_used = k0
    report.alpha = alpha
    if k0 is None or report.n_pairs - k0 < MIN_PAIRS // 2:
        report.is_wavy = False
        report.checks = {"reason": "gaps never stabilize"}
        return report
    increasing = bool(np.all(np.diff(seq) > 0))
    odd = seq[1::2]
    period = float(np.max(np.diff(odd[k0:]))) if odd.size - k0 > 1 else math.inf
    reaches_end = trace.t_end - seq[-1] <= 2 * period
    eps = float(min(seq[2 * k + 1] - seq[2 * k] for k in range(max(k0, 1), report.n_pairs)))
    t_osc = np.array([a for a, _ in report.osc_values[k0:]])
    osc = np.array([b for _, b in report.osc_values[k0:]])
    if np.any(osc <= 0):
        beta = math.nan
    else:
        beta = -float(np.polyfit(np.log(t_osc), np.log(osc), 1)[0])
    c1 = increasing and reaches_end
    c2 = eps >= eps_threshold
    c3 = bool(beta > alpha + 1 + margin)
    report.eps_min = eps
    report.decay_exponent_fit = beta
    report.is_wavy = bool(c1 and c2 and c3)
    report.checks = {"i_monotone_divergent": bool(c1), "ii_gap": bool(c2), "iii_decay": c3,
                     "margin": margin, "eps_threshold": eps_threshold}
    return report


def classify(trace: CurveTrace, tol_root: float = DEFAULT_TOL, **kw) -> WavinessReport:
    """Detection followed by the waviness checks."""
    return check_waviness(detect_sequence(trace, tol_root), trace, **kw)


# asymptotic critical points ----------------------------------------------------

def asymptotic_slopes(nu: float, mu: float):
    """Leading coefficients of the two critical-point equations, ``a1 >= a2``."""
    a1 = 8.0 / (8 - 6 * mu + mu * mu + 4 * nu * nu)
    a2 = 8.0 * (2 - mu) / ((4 - mu) * (4 - 4 * mu + mu * mu + 4 * nu * nu))
    return a1, a2


def _series_derivs(coef, t, odd):
    # value, first and second derivatives of sum c_k (2t)^-(2k + odd)
    n = 2 * np.arange(coef.size) + (1 if odd else 0)
    z = (2.0 * t) ** -n.astype(float)
    v = float(coef @ z)
    d1 = float(coef @ (-n * z)) / t
    d2 = float(coef @ (n * (n + 1) * z)) / (t * t)
    return v, d1, d2


def _pq(params: BesselParams, t):
    nt = params.nu_tilde
    P = _series_derivs(_hankel_coefficients(nt, N_TERMS, "P"), t, False)
    Q = _series_derivs(_hankel_coefficients(nt, N_TERMS, "Q"), t, True)
    a = params.mu / 2 - 1
    out = []
    for v, d1, d2 in (P, Q):
        # drop the common positive factor t**a
        out.append((v, d1 + a * v / t, d2 + 2 * a * d1 / t + a * (a - 1) * v / (t * t)))
    return out


def _chi(params, t):
    return t - (params.nu_tilde / 2 + 0.25) * math.pi


def velocity_equation(params: BesselParams, t):
    """Zero exactly where ``x' = 0`` (pole-free form of the cotangent equation)."""
    (p, dp, _), (q, dq, _) = _pq(params, t)
    c = _chi(params, t)
    return (dp - q) * math.cos(c) - (p + dq) * math.sin(c)


def curvature_equation(params: BesselParams, t):
    """Zero exactly where ``x + x'' = 0``."""
    (p, dp, ddp), (q, dq, ddq) = _pq(params, t)
    c = _chi(params, t)
    return (ddp - 2 * dq) * math.cos(c) - (2 * dp + ddq) * math.sin(c)


def critical_point_equations(params: BesselParams, t_window, tol: float = 1e-12):
    """Roots of the two critical-point equations, paired per period.

    Returns a list of ``(t_hat, t_odd)`` where ``t_hat`` solves ``x' = 0``
    and ``t_odd <= t_hat`` is the nearest preceding root of ``x + x'' = 0``.
    """
    lo, hi = map(float, t_window)
    if lo < 20:
        raise NoRootError("window lies below the asymptotic regime (t < 20)")
    if hi <= lo:
        raise DomainError("window must be increasing")
    shift = (params.nu_tilde / 2 + 0.25) * math.pi
    k0 = math.ceil((lo - shift) / math.pi)
    k1 = math.floor((hi - shift) / math.pi)
    roots = {}
    for name, g in (("hat", velocity_equation), ("odd", curvature_equation)):
        out = []
        for k in range(k0 - 1, k1 + 1):
            a, b = shift + k * math.pi, shift + (k + 1) * math.pi
            ga, gb = g(params, a), g(params, b)
            if ga == 0:
                out.append(a)
                continue
            if (ga > 0) == (gb > 0):
                raise NoRootError(f"no root of the {name} equation in period {k}")
            out.append(brentq(lambda s: g(params, s), a, b, xtol=tol, maxiter=200))
        roots[name] = np.array(out)
    pairs = []
    for th in roots["hat"]:
        if not lo <= th <= hi:
            continue
        prev = roots["odd"][roots["odd"] <= th + tol]
        if prev.size:
            pairs.append((float(th), float(prev[-1])))
    return pairs
