"""Phase-plane trajectories in polar form.

A trace is an ordered sample of a planar curve ``(x(t), y(t))`` together with
velocities, radius ``r`` and a continuous (unwrapped) angle ``phi``. For a
solution of the generalized Bessel equation the curve is ``(x, x')``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterator

import numpy as np

from .errors import (AngularJumpError, DomainError, EmptyTraceError,
                     RefinementError, SpanError)
from .special_functions import BesselParams, gen_bessel, x_plus_ddx

DEFAULT_STEP = math.pi / 16
MAX_BISECTIONS = 40
ENVELOPE_SKIP = 0.10

Evaluator = Callable[[np.ndarray], tuple]


@dataclass(frozen=True, eq=False)
class CurveTrace:
    """Immutable sampled curve with polar data.

    ``evaluator(t)`` returns ``(x, y, vx, vy)`` at arbitrary parameters and
    ``rdot_fn(t)`` the radius derivative; both are used to refine features
    that fall between samples.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    rdot: np.ndarray
    orientation: str
    params: Any
    evaluator: Evaluator
    rdot_fn: Callable[[np.ndarray], np.ndarray]
    kind: str = "J"
    alpha: float | None = None
    known_dim: float | None = None
    mirrored: bool = False
    excised_at: float | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size

    @property
    def dx(self):
        return self.y

    @property
    def ddx(self):
        return self.vy

    @property
    def sign(self) -> int:
        """+1 when phi increases along the trace, -1 otherwise."""
        return 1 if self.orientation == "increasing_phi" else -1

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def speed(self) -> np.ndarray:
        return np.hypot(self.vx, self.vy)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def theta(self) -> np.ndarray:
        """Angle oriented to increase along the trace."""
        return self.sign * self.phi

    def angle_at(self, t, x=None, y=None) -> np.ndarray:
        """Continuous angle at parameters inside the sampled range."""
        t = np.asarray(t, dtype=float)
        if x is None:
            x, y, _, _ = self.evaluator(t)
        guess = np.interp(t, self.t, self.phi)
        raw = np.arctan2(y, x)
        return raw + 2 * math.pi * np.round((guess - raw) / (2 * math.pi))

    def radius_at(self, t):
        x, y, _, _ = self.evaluator(np.asarray(t, dtype=float))
        return np.hypot(x, y)

    def dense_points(self, spacing: float, t_stop: float | None = None, chunk: int = 2_000_000) -> Iterator[tuple]:
        """Yield ``(t, points)`` chunks whose consecutive points are at most ``spacing`` apart.

        Concatenating the chunks gives one polyline without repeated points.
        """
        yield from _dense_points(self, spacing, t_stop, chunk)


def unwrap_angle(raw_points) -> np.ndarray:
    """Continuous polar angle of a point sequence.

    The first angle lies in ``(-pi, pi]``; later ones differ from ``atan2`` by
    integer multiples of ``2 pi``.
    """
    p = np.asarray(raw_points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise DomainError("expected an (n, 2) array of points")
    if np.any((p[:, 0] == 0) & (p[:, 1] == 0)):
        raise DomainError("a point lies at the origin")
    raw = np.arctan2(p[:, 1], p[:, 0])
    if raw.size < 2:
        return raw
    z = p[:, 0] + 1j * p[:, 1]
    inc = np.angle(z[1:] * np.conj(z[:-1]))
    if np.any(np.abs(inc) >= math.pi / 2):
        i = int(np.argmax(np.abs(inc) >= math.pi / 2))
        raise AngularJumpError(f"angle jump {inc[i]:.3g} between points {i} and {i + 1}")
    cont = raw[0] + np.concatenate([[0.0], np.cumsum(inc)])
    return raw + 2 * math.pi * np.round((cont - raw) / (2 * math.pi))


def build_trace(t, evaluator: Evaluator, rdot_fn, params, **kw) -> CurveTrace:
    t = np.asarray(t, dtype=float)
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise DomainError("trace parameters must be strictly increasing with at least 2 samples")
    x, y, vx, vy = (np.asarray(a, dtype=float) for a in evaluator(t))
    r = np.hypot(x, y)
    if np.any(r <= 0):
        raise DomainError("trace passes through the origin")
    phi = unwrap_angle(np.column_stack([x, y]))
    orientation = "increasing_phi" if phi[-1] >= phi[0] else "decreasing_phi"
    return CurveTrace(t=t, x=x, y=y, vx=vx, vy=vy, r=r, phi=phi, rdot=np.asarray(rdot_fn(t), dtype=float),
                      orientation=orientation, params=params, evaluator=evaluator, rdot_fn=rdot_fn, **kw)


def refine_grid(t: np.ndarray, evaluator: Evaluator, step_control: float) -> np.ndarray:
    """Bisect intervals until consecutive angle increments stay below ``step_control``."""
    t = np.asarray(t, dtype=float)
    for _ in range(MAX_BISECTIONS + 1):
        x, y, _, _ = evaluator(t)
        z = x + 1j * y
        inc = np.abs(np.angle(z[1:] * np.conj(z[:-1])))
        bad = np.nonzero(inc > step_control)[0]
        if bad.size == 0:
            return t
        mids = 0.5 * (t[bad] + t[bad + 1])
        t = np.sort(np.concatenate([t, mids]))
    raise RefinementError(f"angle contract unmet after {MAX_BISECTIONS} bisections")


def bessel_evaluator(params: BesselParams, kind: str = "J") -> Evaluator:
    def ev(t):
        x, dx, ddx = gen_bessel(params, kind, np.asarray(t, dtype=float))
        return x, dx, dx, ddx
    return ev


def bessel_rdot(params: BesselParams, kind: str = "J"):
    """Radius derivative of the phase curve with ``x + x''`` taken from the ODE.

    The rewritten form is sign-exact; for ``nu = 0`` it reduces to
    ``-(2 - mu) x'^2 / (t r) <= 0``.
    """
    def rd(t):
        t = np.asarray(t, dtype=float)
        x, dx, _ = gen_bessel(params, kind, t)
        return dx * x_plus_ddx(params, t, x, dx) / np.hypot(x, dx)
    return rd


def sample_trajectory(params: BesselParams, kind: str = "J", step_control: float = DEFAULT_STEP) -> CurveTrace:
    """Sample the phase curve ``(x, x')`` on ``[tau0, T]``.

    The initial grid uses a t-step of ``0.9 step_control`` (the angle advances
    at unit rate asymptotically); intervals whose angle increment exceeds
    ``step_control`` are bisected.
    """
    if not step_control > 0:
        raise DomainError(f"step_control must be positive, got {step_control}")
    step_control = min(step_control, math.pi / 2 * 0.99)
    n = max(2, int(math.ceil((params.T - params.tau0) / (0.9 * step_control))) + 1)
    ev = bessel_evaluator(params, kind)
    t = refine_grid(np.linspace(params.tau0, params.T, n), ev, step_control)
    return build_trace(t, ev, bessel_rdot(params, kind), params, kind=kind,
                       alpha=params.alpha, known_dim=params.analytic_dim)


def radius_derivative(trace: CurveTrace, i: int) -> float:
    """``r'`` at sample ``i``, equal to ``(x x' + x' x'')/r`` for phase traces."""
    return float(trace.rdot[i])


def excise(trace: CurveTrace, t_cut: float) -> CurveTrace:
    """Keep the samples with ``t > t_cut``; ``t_cut`` equal to the start is the identity."""
    if t_cut == trace.t_start:
        return trace
    if t_cut < trace.t_start:
        raise DomainError(f"t_cut {t_cut} precedes the trace start {trace.t_start}")
    keep = trace.t > t_cut
    if np.count_nonzero(keep) < 2:
        raise EmptyTraceError(f"excision at {t_cut} leaves fewer than two samples")
    sub = {name: getattr(trace, name)[keep] for name in ("t", "x", "y", "vx", "vy", "r", "phi", "rdot")}
    return replace(trace, excised_at=float(t_cut), **sub)


def mirror(trace: CurveTrace) -> CurveTrace:
    """Reflect across the x-axis, i.e. the curve ``(x, -x')``."""
    ev0 = trace.evaluator

    def ev(t):
        x, y, vx, vy = ev0(t)
        return x, -y, vx, -vy

    flip = "decreasing_phi" if trace.orientation == "increasing_phi" else "increasing_phi"
    return replace(trace, y=-trace.y, vy=-trace.vy, phi=-trace.phi, orientation=flip,
                   evaluator=ev, mirrored=not trace.mirrored)


def angular_parameter(trace: CurveTrace) -> np.ndarray:
    """Oriented angle shifted so that it equals ``t`` at the first sample."""
    th = trace.theta()
    return th - th[0] + trace.t[0]


def monotone_tail(trace: CurveTrace) -> int:
    """First index after which the oriented angle is strictly increasing."""
    d = np.diff(trace.theta())
    bad = np.nonzero(d <= 0)[0]
    return 0 if bad.size == 0 else int(bad[-1]) + 1


def _t_of_angle(trace: CurveTrace, start: int, target: np.ndarray) -> np.ndarray:
    ang = angular_parameter(trace)[start:]
    return np.interp(target, ang, trace.t[start:])


@dataclass(frozen=True)
class RadialDecreaseReport:
    min_scaled: float
    phi_at_min: float
    dphi_at_min: float
    alpha: float
    passed: bool


def radial_decrease_check(trace: CurveTrace, delta_phi_min: float, delta_phi_max: float,
                          n_dphi: int = 16, alpha: float | None = None) -> RadialDecreaseReport:
    """Minimum over a (phi, dphi) grid of ``[f(phi) - f(phi + dphi)] phi**(alpha + 1)``.

    ``phi`` is the oriented angle shifted to agree with ``t`` at the start of
    the trace; the first 10% of the angular window is skipped.
    """
    if not 0 < delta_phi_min < delta_phi_max:
        raise DomainError("need 0 < delta_phi_min < delta_phi_max")
    if alpha is None:
        alpha = trace.alpha
    if alpha is None:
        raise DomainError("alpha is unknown for this trace; pass it explicitly")
    start = monotone_tail(trace)
    ang = angular_parameter(trace)[start:]
    span = ang[-1] - ang[0]
    if span < delta_phi_max + 4 * math.pi:
        raise SpanError(f"trace spans {span:.3g} rad, need {delta_phi_max + 4 * math.pi:.3g}")
    lo = ang[0] + ENVELOPE_SKIP * span
    base = ang[(ang >= lo) & (ang + delta_phi_max <= ang[-1])]
    best = (math.inf, math.nan, math.nan)
    for dphi in np.linspace(delta_phi_min, delta_phi_max, n_dphi):
        t1 = _t_of_angle(trace, start, base)
        t2 = _t_of_angle(trace, start, base + dphi)
        dec = (trace.radius_at(t1) - trace.radius_at(t2)) * base ** (alpha + 1)
        i = int(np.argmin(dec))
        if dec[i] < best[0]:
            best = (float(dec[i]), float(base[i]), float(dphi))
    return RadialDecreaseReport(best[0], best[1], best[2], float(alpha), best[0] > 0)


def envelope_slope(trace: CurveTrace) -> float:
    """Least-squares slope of ``log r`` against ``log phi`` on the tail window."""
    start = monotone_tail(trace)
    ang = angular_parameter(trace)[start:]
    r = trace.r[start:]
    keep = ang >= ang[0] + ENVELOPE_SKIP * (ang[-1] - ang[0])
    return float(np.polyfit(np.log(ang[keep]), np.log(r[keep]), 1)[0])


def angle_law_profile(trace: CurveTrace, tail: float = 0.5):
    """Scaled deviation ``|(theta - theta_bar) - t| * t`` of the angle from unit speed.

    ``theta_bar`` is the limit of ``theta - t``, estimated by fitting
    ``c + a/t + b/t^2`` on the last ``tail`` fraction of the samples.
    """
    e = trace.theta() - trace.t
    k = trace.t >= trace.t[0] + (1 - tail) * (trace.t[-1] - trace.t[0])
    A = np.column_stack([np.ones(k.sum()), 1 / trace.t[k], 1 / trace.t[k] ** 2])
    c = np.linalg.lstsq(A, e[k], rcond=None)[0][0]
    return trace.t, np.abs(e - c) * trace.t


def write_csv(trace: CurveTrace, fh) -> None:
    """Write ``t,x,dx,r,phi`` rows with 17 significant digits."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "x", "dx", "r", "phi"])
    for row in zip(trace.t, trace.x, trace.y, trace.r, trace.phi):
        w.writerow([f"{v:.17g}" for v in row])


def _dense_points(trace: CurveTrace, spacing: float, t_stop, chunk: int):
    if not spacing > 0:
        raise DomainError("spacing must be positive")
    t = trace.t
    last = t.size - 1 if t_stop is None else min(t.size - 1, int(np.searchsorted(t, t_stop)) + 1)
    sp = trace.speed
    dt = np.diff(t[:last + 1])
    bound = np.maximum(sp[:last], sp[1:last + 1]) * dt
    npts = np.maximum(1, np.ceil(1.25 * bound / spacing)).astype(np.int64)
    i = 0
    prev = None
    while i < last:
        # group intervals so one chunk holds about `chunk` points
        csum = np.cumsum(npts[i:])
        j = i + max(1, int(np.searchsorted(csum, chunk)))
        j = min(j, last)
        counts = npts[i:j]
        seg = np.repeat(np.arange(i, j), counts)
        offs = np.arange(seg.size) - np.repeat(np.cumsum(counts) - counts, counts)
        tt = t[seg] + dt[seg] * offs / counts[seg - i]
        tt = np.append(tt, t[j])
        x, y, _, _ = trace.evaluator(tt)
        pts = np.column_stack([x, y])
        gaps = np.hypot(*np.diff(pts, axis=0).T)
        if np.any(gaps > spacing):
            tt, pts = _refine_points(trace, tt, pts, spacing)
        if prev is not None:
            tt, pts = tt[1:], pts[1:]
        prev = True
        yield tt, pts
        i = j


def _refine_points(trace, tt, pts, spacing):
    for _ in range(30):
        gaps = np.hypot(*np.diff(pts, axis=0).T)
        bad = np.nonzero(gaps > spacing)[0]
        if bad.size == 0:
            return tt, pts
        k = np.ceil(gaps[bad] / spacing).astype(np.int64) + 1
        seg = np.repeat(bad, k - 1)
        offs = np.arange(seg.size) - np.repeat(np.cumsum(k - 1) - (k - 1), k - 1) + 1
        new_t = tt[seg] + (tt[seg + 1] - tt[seg]) * offs / np.repeat(k, k - 1)
        x, y, _, _ = trace.evaluator(new_t)
        tt = np.concatenate([tt, new_t])
        order = np.argsort(tt, kind="stable")
        tt = tt[order]
        pts = np.concatenate([pts, np.column_stack([x, y])])[order]
    raise RefinementError("dense sampling failed to meet the spacing contract")
