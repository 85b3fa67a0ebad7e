"""Box-counting and Minkowski-content dimension estimates for planar curves.

Counting is exact for the polyline through the sample points: each segment
contributes every grid cell it passes through. Cells are identified by
64-bit keys and deduplicated by sorting, so memory follows the number of
occupied cells rather than the bounding box.

A truncated spiral has a rectifiable tail below its last ring spacing. For
spiral traces the estimator therefore counts, at each scale, the part of
the curve where rings are at least a cell apart and fills the interior of
the first turn after that point: once rings are closer than a cell, every
cell inside is hit by some later ring, including rings beyond the end of
the trace.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DensityError, DomainError, EstimationError, MemoryBudgetError
from .phase_curve import CurveTrace, angular_parameter, monotone_tail, sample_trajectory
from .special_functions import BesselParams

SCALES_PER_DECADE = 12
DEFAULT_DECADES = 2.5
DEFAULT_OFFSETS = 8
DEFAULT_SEED = 42
MIN_WINDOW = 5
SLOPE_SPREAD = 0.03
CUTOFF_FACTOR = 3.0
TOP_FRACTION = 0.1
POINT_BUDGET = 6_000_000
MINK_POINT_BUDGET = 1_500_000
CELL_BUDGET = 60_000_000
BOX_FILL_RATIO = 1 / 1.5
MINK_FILL_RATIO = 2 / 1.5

_SHIFT = np.int64(1 << 30)
_ROW = np.int64(1 << 31)


@dataclass
class DimensionEstimate:
    method: str
    scales: np.ndarray
    counts: np.ndarray
    window: tuple
    slope: float
    dim: float
    stderr: float
    analytic_dim: float | None = None
    offsets_averaged: int = 1
    inner_cutoff: float = 0.0
    seed: int = DEFAULT_SEED
    fit: str = "ols"
    meta: dict = field(default_factory=dict)

    @property
    def counts_or_areas(self):
        return self.counts

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scales"] = [float(v) for v in self.scales]
        d["counts"] = [float(v) for v in self.counts]
        d["window"] = [int(self.window[0]), int(self.window[1])]
        d["offsets"] = d.pop("offsets_averaged")
        return d


# cell enumeration -------------------------------------------------------------

def _keys(i, j):
    return (j + _SHIFT) * _ROW + (i + _SHIFT)


def _cell_keys(P: np.ndarray, d: float, ox: float, oy: float) -> np.ndarray:
    """Keys of all cells met by the polyline ``P`` (spacing below one cell)."""
    X = (P[:, 0] - ox) / d
    Y = (P[:, 1] - oy) / d
    i = np.floor(X).astype(np.int64)
    j = np.floor(Y).astype(np.int64)
    di = np.diff(i)
    dj = np.diff(j)
    diag = np.nonzero((di != 0) & (dj != 0))[0]
    keys = _keys(i, j)
    if diag.size:
        # a diagonal step passes through one of the two side cells; pick the
        # one whose boundary line the segment crosses first
        i0, j0 = i[diag], j[diag]
        i1, j1 = i[diag + 1], j[diag + 1]
        x0, y0 = X[diag], Y[diag]
        xb = np.maximum(i0, i1).astype(float)
        yb = np.maximum(j0, j1).astype(float)
        sx = (xb - x0) / (X[diag + 1] - x0)
        sy = (yb - y0) / (Y[diag + 1] - y0)
        xfirst = sx < sy
        mid = _keys(np.where(xfirst, i1, i0), np.where(xfirst, j0, j1))
        keys = np.concatenate([keys, mid])
    return keys


def _unique_keys(chunks) -> np.ndarray:
    parts = []
    for k in chunks:
        if k.size:
            k = k[np.concatenate([[True], k[1:] != k[:-1]])]
            parts.append(np.unique(k))
    if not parts:
        return np.empty(0, dtype=np.int64)
    return parts[0] if len(parts) == 1 else np.unique(np.concatenate(parts))


def _polygon_crossings(poly: np.ndarray, step: float, origin: float):
    """Row indices and x-crossings of polygon edges with lines ``y = origin + (row + 1/2) step``."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    ya, yb = a[:, 1], b[:, 1]
    lo = np.minimum(ya, yb)
    hi = np.maximum(ya, yb)
    r0 = np.ceil((lo - origin) / step - 0.5).astype(np.int64)
    r1 = np.ceil((hi - origin) / step - 0.5).astype(np.int64)
    n = np.maximum(r1 - r0, 0)
    e = np.repeat(np.arange(a.shape[0]), n)
    rows = np.repeat(r0, n) + (np.arange(e.size) - np.repeat(np.cumsum(n) - n, n))
    yc = origin + (rows + 0.5) * step
    x = a[e, 0] + (yc - ya[e]) * (b[e, 0] - a[e, 0]) / (yb[e] - ya[e])
    order = np.lexsort((x, rows))
    rows, x = rows[order], x[order]
    # even-odd pairing within each row
    return rows[0::2], x[0::2], x[1::2]


def _fill_intervals(poly, d, ox, oy):
    rows, x1, x2 = _polygon_crossings(poly, d, oy)
    lo = np.ceil((x1 - ox) / d - 0.5).astype(np.int64)
    hi = np.floor((x2 - ox) / d - 0.5).astype(np.int64)
    keep = hi >= lo
    return rows[keep], lo[keep], hi[keep]


def _count_with_fill(keys: np.ndarray, fill) -> int:
    if fill is None:
        return int(keys.size)
    rows, lo, hi = fill
    if rows.size == 0:
        return int(keys.size)
    a = np.searchsorted(keys, _keys(lo, rows), side="left")
    b = np.searchsorted(keys, _keys(hi, rows), side="right")
    inside = int(np.sum(b - a))
    return int(keys.size + np.sum(hi - lo + 1) - inside)


def _max_gap(P: np.ndarray) -> float:
    if P.shape[0] < 2:
        return 0.0
    return float(np.max(np.hypot(*np.diff(P, axis=0).T)))


def _offsets(n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise DomainError("offsets must be at least 1")
    return np.random.default_rng(seed).random((n, 2))


def box_count(points, delta: float, offsets: int = 1, seed: int = DEFAULT_SEED, fill=None) -> float:
    """Mean number of ``delta``-cells met by the polyline over random grid offsets.

    Parameters
    ----------
    points : (n, 2) array
        Ordered curve samples, consecutive spacing below ``delta/4``.
    fill : (m, 2) array, optional
        Polygon whose interior cells (by centre) also count as occupied.
    """
    P = np.asarray(points, dtype=float)
    if not delta > 0:
        raise DomainError("delta must be positive")
    if _max_gap(P) > delta / 4 * (1 + 1e-12):
        raise DensityError(f"point spacing {_max_gap(P):.3g} exceeds delta/4 = {delta / 4:.3g}")
    u = _offsets(offsets, seed)
    total = 0
    for ox, oy in u * delta:
        keys = _unique_keys([_cell_keys(P, delta, ox, oy)])
        f = _fill_intervals(np.asarray(fill, float), delta, ox, oy) if fill is not None else None
        total += _count_with_fill(keys, f)
    return total / offsets


# Minkowski area ---------------------------------------------------------------

def _capsule_rows(A, B, eps, h):
    """Row-wise x-intervals of the eps-neighbourhoods of segments AB."""
    ylo = np.minimum(A[:, 1], B[:, 1]) - eps
    yhi = np.maximum(A[:, 1], B[:, 1]) + eps
    r0 = np.ceil(ylo / h - 0.5).astype(np.int64)
    r1 = np.floor(yhi / h - 0.5).astype(np.int64)
    n = np.maximum(r1 - r0 + 1, 0)
    s = np.repeat(np.arange(A.shape[0]), n)
    rows = np.repeat(r0, n) + (np.arange(s.size) - np.repeat(np.cumsum(n) - n, n))
    y = (rows + 0.5) * h
    ax, ay = A[s, 0], A[s, 1]
    # end caps
    w2a = eps * eps - (y - ay) ** 2
    w2b = eps * eps - (y - B[s, 1]) ** 2
    wa = np.sqrt(np.maximum(w2a, 0.0))
    wb = np.sqrt(np.maximum(w2b, 0.0))
    bx = B[s, 0]
    left = np.minimum(np.where(w2a >= 0, ax - wa, np.inf), np.where(w2b >= 0, bx - wb, np.inf))
    right = np.maximum(np.where(w2a >= 0, ax + wa, -np.inf), np.where(w2b >= 0, bx + wb, -np.inf))
    # rectangle: along-segment coordinate in [0, len], normal coordinate in [-eps, eps]
    D = B - A
    ln = np.hypot(D[:, 0], D[:, 1])
    safe = np.where(ln > 0, ln, 1.0)
    ux, uy, L = (D[:, 0] / safe)[s], (D[:, 1] / safe)[s], ln[s]
    cy = y - ay
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = -cy * uy / ux
        p2 = (L - cy * uy) / ux
        q1 = (cy * ux - eps) / uy
        q2 = (cy * ux + eps) / uy
    big = np.inf
    plo = np.where(ux != 0, np.minimum(p1, p2), np.where((cy * uy >= 0) & (cy * uy <= L), -big, big))
    phi_ = np.where(ux != 0, np.maximum(p1, p2), np.where((cy * uy >= 0) & (cy * uy <= L), big, -big))
    qlo = np.where(uy != 0, np.minimum(q1, q2), np.where(np.abs(cy * ux) <= eps, -big, big))
    qhi = np.where(uy != 0, np.maximum(q1, q2), np.where(np.abs(cy * ux) <= eps, big, -big))
    lo = np.maximum(plo, qlo)
    hi = np.minimum(phi_, qhi)
    strip = (hi >= lo) & (L > 0)
    left = np.where(strip, np.minimum(left, ax + lo), left)
    right = np.where(strip, np.maximum(right, ax + hi), right)
    keep = right > left
    return rows[keep], left[keep], right[keep]


def _merge_rows(rows, left, right, span):
    """Union of intervals per row; returns merged (rows, left, right)."""
    if rows.size == 0:
        return rows, left, right
    base = rows.min()
    shift = (rows - base) * span
    order = np.argsort(left + shift)
    rows, left, right, shift = rows[order], left[order], right[order], shift[order]
    ls = left + shift
    cm = np.maximum.accumulate(right + shift)
    start = np.concatenate([[True], ls[1:] > cm[:-1]])
    gi = np.nonzero(start)[0]
    ends = np.concatenate([gi[1:] - 1, [rows.size - 1]])
    return rows[gi], left[gi], cm[ends] - shift[gi]


def minkowski_area(points, eps: float, raster_resolution: float | None = None, fill=None,
                   cell_budget: int = CELL_BUDGET) -> float:
    """Area of the ``eps``-neighbourhood of a polyline, with optional filled polygon.

    The neighbourhood is intersected with horizontal lines spaced
    ``raster_resolution`` apart (at most ``eps/8``); each segment contributes
    the exact chord of its capsule, chords are merged per line, and the
    area is the midpoint-rule sum of merged lengths.
    """
    P = np.asarray(points, dtype=float)
    if not eps > 0:
        raise DomainError("eps must be positive")
    h = eps / 8 if raster_resolution is None else float(raster_resolution)
    if not 0 < h <= eps / 8 * (1 + 1e-12):
        raise DomainError("raster_resolution must lie in (0, eps/8]")
    if P.shape[0] == 1:
        P = np.vstack([P, P])
    dy = np.abs(np.diff(P[:, 1]))
    pairs = int(np.sum(np.floor((dy + 2 * eps) / h) + 1))
    if pairs > cell_budget:
        raise MemoryBudgetError(f"{pairs} raster cells exceed the budget of {cell_budget}")
    span = float(np.ptp(P[:, 0])) + 4 * eps + 1.0
    chunk = max(1, 2_000_000 // max(1, int(2 * eps / h) + 2))
    acc = []
    for lo in range(0, P.shape[0] - 1, chunk):
        seg = P[lo:lo + chunk + 1]
        acc.append(_merge_rows(*_capsule_rows(seg[:-1], seg[1:], eps, h), span))
    if fill is not None:
        poly = np.asarray(fill, dtype=float)
        rows, x1, x2 = _polygon_crossings(poly, h, 0.0)
        span = max(span, float(np.ptp(poly[:, 0])) + 1.0)
        acc.append((rows, x1, x2))
    rows = np.concatenate([a[0] for a in acc])
    left = np.concatenate([a[1] for a in acc])
    right = np.concatenate([a[2] for a in acc])
    rows, left, right = _merge_rows(rows, left, right, span)
    return float(h * np.sum(right - left))


# spiral geometry --------------------------------------------------------------

@dataclass
class SpiralGeometry:
    """Ring-spacing data of a spiral trace along its angularly monotone tail."""

    start: int
    gap: np.ndarray
    turn_end: np.ndarray
    arc: np.ndarray
    outer_gap: float
    cutoff: float

    def fill_start(self, threshold: float) -> int | None:
        """First index from which every later ring gap lies below ``threshold``."""
        ok = self._suffix_max < threshold
        idx = np.nonzero(~ok)[0]
        first = 0 if idx.size == 0 else int(idx[-1]) + 1
        if first >= self._nvalid:
            return None
        return self.start + first

    def __post_init__(self):
        g = self.gap[: self._valid_len()]
        bad = np.where(g > 0, g, np.inf)
        self._nvalid = g.size
        self._suffix_max = np.maximum.accumulate(bad[::-1])[::-1] if g.size else g

    def _valid_len(self):
        return int(np.count_nonzero(np.isfinite(self.turn_end)))


def spiral_geometry(trace: CurveTrace) -> SpiralGeometry | None:
    """Ring gaps ``r(theta) - r(theta + 2 pi)`` or None if the trace is not spiral-like."""
    start = monotone_tail(trace)
    ang = angular_parameter(trace)[start:]
    t = trace.t[start:]
    if ang.size < 8 or ang[-1] - ang[0] < 4 * math.pi:
        return None
    target = ang + 2 * math.pi
    valid = target <= ang[-1]
    t_turn = np.full(ang.shape, np.inf)
    t_turn[valid] = np.interp(target[valid], ang, t)
    gap = np.full(ang.shape, np.nan)
    gap[valid] = trace.r[start:][valid] - trace.radius_at(t_turn[valid])
    gv = gap[valid]
    half = gv[gv.size // 2:]
    if half.size == 0 or np.any(half <= 0):
        return None
    sp = trace.speed
    dt = np.diff(trace.t)
    arc = np.concatenate([[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]) * dt)])
    nturn = max(1, int(np.searchsorted(ang, ang[0] + 2 * math.pi)))
    outer = float(np.max(gv[:nturn]))
    return SpiralGeometry(start=start, gap=gap, turn_end=t_turn, arc=arc, outer_gap=outer,
                          cutoff=inner_cutoff(trace))


def inner_cutoff(trace: CurveTrace) -> float:
    """Ring spacing at the end of the trace, extrapolated from the envelope law.

    Returns 0 for traces that are not spiral-like.
    """
    start = monotone_tail(trace)
    ang = angular_parameter(trace)[start:]
    if ang.size < 8 or ang[-1] - ang[0] < 4 * math.pi:
        return 0.0
    r = trace.r[start:]
    keep = ang >= ang[0] + 0.5 * (ang[-1] - ang[0])
    slope, icpt = np.polyfit(np.log(ang[keep]), np.log(r[keep]), 1)
    if slope > -0.02:
        return 0.0
    a = -slope
    k = math.exp(icpt)
    end = ang[-1]
    return float(k * (end ** -a - (end + 2 * math.pi) ** -a))


# fits -------------------------------------------------------------------------

def ols_fit(x, y):
    """Slope, intercept and slope standard error of an ordinary least-squares line."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = x.size
    A = np.column_stack([x, np.ones(n)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    if n > 2:
        s2 = float(res @ res) / (n - 2)
        se = math.sqrt(s2 / float(np.sum((x - x.mean()) ** 2)))
    else:
        se = float("nan")
    return float(coef[0]), float(coef[1]), se


def select_window(log_inv_scale, log_count, width: int = MIN_WINDOW, spread: float = SLOPE_SPREAD):
    """Longest run of sliding-window local slopes varying less than ``spread``.

    Returns inclusive indices ``(i, j)`` into the scale ladder; ties go to the
    finer scales.
    """
    x = np.asarray(log_inv_scale, float)
    y = np.asarray(log_count, float)
    n = x.size
    if n < width:
        raise EstimationError(f"need at least {width} scales, got {n}")
    loc = np.array([np.polyfit(x[i:i + width], y[i:i + width], 1)[0] for i in range(n - width + 1)])
    best = None
    for i in range(loc.size):
        lo = hi = loc[i]
        j = i
        while j + 1 < loc.size:
            lo2, hi2 = min(lo, loc[j + 1]), max(hi, loc[j + 1])
            if hi2 - lo2 >= spread:
                break
            lo, hi, j = lo2, hi2, j + 1
        if hi - lo < spread:
            cand = (j - i, i)
            if best is None or cand[0] >= best[0]:
                best = cand
    if best is None:
        raise EstimationError("no stable regression window")
    i = best[1]
    return i, i + best[0] + width - 1


def two_term_fit(scales, counts, exponent: float = 1.0):
    """Fit ``N = A s**-D + B s**-exponent`` by variable projection.

    The second term absorbs the rectifiable part of a truncated curve. The
    residual is relative, ``model/N - 1``. Returns ``(D, A, B, stderr_D)``.
    """
    s = np.asarray(scales, float)
    N = np.asarray(counts, float)
    ls = np.log(s)

    def design(D):
        return np.column_stack([s ** -D, s ** -exponent]) / N[:, None]

    def solve(D):
        X = design(D)
        coef, *_ = np.linalg.lstsq(X, np.ones_like(N), rcond=None)
        r = X @ coef - 1.0
        return float(r @ r), coef

    res = minimize_scalar(lambda D: solve(D)[0], bounds=(1.0, 2.0), method="bounded",
                          options={"xatol": 1e-9})
    D = float(res.x)
    sse, (A, B) = solve(D)
    X = design(D)
    J = np.column_stack([-A * ls * X[:, 0], X[:, 0], X[:, 1]])
    dof = max(N.size - 3, 1)
    cov = (sse / dof) * np.linalg.pinv(J.T @ J)
    return D, float(A), float(B), math.sqrt(max(cov[0, 0], 0.0))


# ladder and estimation --------------------------------------------------------

def scale_ladder(hi: float, lo: float, n_scales: int | None = None) -> np.ndarray:
    if not 0 < lo < hi:
        raise DomainError(f"need 0 < lo < hi, got {lo}, {hi}")
    if n_scales is None:
        n_scales = int(round(SCALES_PER_DECADE * math.log10(hi / lo))) + 1
    if n_scales < MIN_WINDOW:
        raise EstimationError(f"ladder of {n_scales} scales is shorter than {MIN_WINDOW}")
    return np.geomspace(hi, lo, n_scales)


@dataclass
class _Plan:
    scales: np.ndarray
    stop: list
    poly: list


def _plan(trace: CurveTrace, geo: SpiralGeometry | None, scales, ratio):
    stop, poly = [], []
    for d in scales:
        k = geo.fill_start(d * ratio) if geo is not None else None
        if k is None:
            stop.append(trace.t_end)
            poly.append(None)
        else:
            t_c = float(trace.t[k])
            t_e = float(geo.turn_end[k - geo.start])
            stop.append(t_e)
            poly.append((t_c, t_e))
    return _Plan(np.asarray(scales), stop, poly)


def _arc_upto(trace, geo, t):
    sp = trace.speed
    dt = np.diff(trace.t)
    arc = np.concatenate([[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]) * dt)]) if geo is None else geo.arc
    return float(np.interp(t, trace.t, arc))


def _default_scales(trace, geo, method, n_scales, budget):
    sf = 0.25 if method == "box_count" else 1.0
    ratio = BOX_FILL_RATIO if method == "box_count" else MINK_FILL_RATIO
    if geo is not None:
        top = TOP_FRACTION * geo.outer_gap
        lo = max(CUTOFF_FACTOR * geo.cutoff, top * 10 ** -DEFAULT_DECADES)
    else:
        ext = float(np.max(np.ptp(trace.points, axis=0)))
        top = ext / 10
        lo = top * 10 ** -DEFAULT_DECADES
    full = scale_ladder(top, lo, None if n_scales is None else max(n_scales, MIN_WINDOW))
    plan = _plan(trace, geo, full, ratio)
    cost = np.array([1.25 * _arc_upto(trace, geo, s) / (sf * d) for d, s in zip(full, plan.stop)])
    ok = np.nonzero(cost <= budget)[0]
    if ok.size == 0:
        raise EstimationError("point budget too small for any scale")
    last = int(ok[-1])
    scales = full[: last + 1]
    if n_scales is not None and last + 1 < full.size:
        scales = scale_ladder(scales[0], scales[-1], n_scales)
    return scales


def _dense(trace, spacing, t_stop):
    ts, ps = [], []
    for tt, pp in trace.dense_points(spacing, t_stop):
        ts.append(tt)
        ps.append(pp)
    return np.concatenate(ts), np.concatenate(ps)


def _poly_from(T, P, stride, span):
    t_c, t_e = span
    a = int(np.searchsorted(T, t_c))
    b = int(np.searchsorted(T, t_e, side="right"))
    return P[a:b:stride]


def estimate_dimension(curve, method: str = "box_count", scale_decades=None, n_scales: int | None = None,
                       offsets: int = DEFAULT_OFFSETS, seed: int = DEFAULT_SEED, fit: str = "auto",
                       fill_core: bool = True, point_budget: int | None = None) -> DimensionEstimate:
    """Estimate the box dimension of a trace or of an ordered point array.

    Parameters
    ----------
    method : {'box_count', 'minkowski'}
    scale_decades : (float, float), optional
        ``(log10 s_max, log10 s_min)``. By default the ladder runs from a tenth
        of the outer ring spacing down 2.5 decades, clipped at three times the
        inner cutoff and at the point budget.
    fit : {'auto', 'two_term', 'ols'}
        'two_term' fits ``N = A s^-D + B s^-1`` on the whole ladder; 'ols'
        regresses on the automatically selected window. 'auto' picks
        'two_term' for spiral traces and 'ols' otherwise.
    """
    method = {"box": "box_count", "minkowski": "minkowski"}.get(method, method)
    if method not in ("box_count", "minkowski"):
        raise DomainError(f"unknown method {method!r}")
    if fit not in ("auto", "two_term", "ols"):
        raise DomainError(f"unknown fit {fit!r}")
    sf = 0.25 if method == "box_count" else 1.0
    ratio = BOX_FILL_RATIO if method == "box_count" else MINK_FILL_RATIO
    if isinstance(curve, CurveTrace):
        trace = curve
        geo = spiral_geometry(trace) if fill_core else None
        cutoff = geo.cutoff if geo is not None else inner_cutoff(trace)
        if scale_decades is None:
            if point_budget is None:
                point_budget = POINT_BUDGET if method == "box_count" else MINK_POINT_BUDGET
            scales = _default_scales(trace, geo, method, n_scales, point_budget)
        else:
            hi, lo = 10.0 ** max(scale_decades), 10.0 ** min(scale_decades)
            scales = scale_ladder(hi, lo, n_scales)
        plan = _plan(trace, geo, scales, ratio)
        t_need = max(plan.stop)
        T, P = _dense(trace, sf * scales[-1], t_need)
        analytic = trace.known_dim
        spiral = geo is not None
    else:
        P = np.asarray(curve, dtype=float)
        T = np.arange(P.shape[0], dtype=float)
        cutoff = 0.0
        analytic = None
        spiral = False
        if scale_decades is None:
            ext = float(np.max(np.ptp(P, axis=0)))
            hi = ext / 10
            lo = max(hi * 10 ** -DEFAULT_DECADES, _max_gap(P) / sf)
        else:
            hi, lo = 10.0 ** max(scale_decades), 10.0 ** min(scale_decades)
        scales = scale_ladder(hi, lo, n_scales)
        plan = _Plan(scales, [T[-1]] * scales.size, [None] * scales.size)
    if fit == "auto":
        fit = "two_term" if spiral else "ols"

    base = sf * scales[-1]
    u = _offsets(offsets if method == "box_count" else 1, seed)
    values = np.empty(scales.size)
    for k, d in enumerate(scales):
        stride = max(1, int(math.floor(sf * d / base * (1 - 1e-12))))
        end = int(np.searchsorted(T, plan.stop[k], side="right"))
        Q = P[:end:stride]
        if (end - 1) % stride:
            Q = np.vstack([Q, P[end - 1]])
        if _max_gap(Q) > sf * d * (1 + 1e-9):
            raise DensityError(f"spacing {_max_gap(Q):.3g} too coarse for scale {d:.3g}")
        poly = _poly_from(T, P, stride, plan.poly[k]) if plan.poly[k] is not None else None
        if method == "box_count":
            tot = 0
            for ox, oy in u * d:
                keys = _unique_keys(_cell_keys(Q[a:a + 4_000_001], d, ox, oy)
                                    for a in range(0, Q.shape[0], 4_000_000))
                f = _fill_intervals(poly, d, ox, oy) if poly is not None else None
                tot += _count_with_fill(keys, f)
            values[k] = tot / u.shape[0]
        else:
            values[k] = minkowski_area(Q, d, d / 8, fill=poly, cell_budget=max(CELL_BUDGET, 40 * Q.shape[0]))

    if method == "box_count":
        N = values
    else:
        N = values / scales ** 2
    if fit == "two_term":
        if scales.size < MIN_WINDOW:
            raise EstimationError("ladder shorter than the minimum window")
        D, A, B, se = two_term_fit(scales, N)
        window = (0, scales.size - 1)
        meta = {"A": A, "B": B}
    else:
        i, j = select_window(-np.log(scales), np.log(N))
        D, _, se = ols_fit(-np.log(scales[i:j + 1]), np.log(N[i:j + 1]))
        window = (i, j)
        meta = {}
    slope = D if method == "box_count" else 2.0 - D
    meta.update({"filled_scales": int(sum(p is not None for p in plan.poly)), "points": int(P.shape[0])})
    return DimensionEstimate(method=method, scales=scales, counts=values, window=window, slope=float(slope),
                             dim=float(D), stderr=float(se), analytic_dim=analytic,
                             offsets_averaged=int(u.shape[0]), inner_cutoff=float(cutoff), seed=int(seed),
                             fit=fit, meta=meta)


def verify_dimension_law(params_grid, kind: str = "J", **kw) -> dict:
    """Estimate the dimension of each J-trace and compare with ``4/(4 - mu)``."""
    rows = []
    for p in params_grid:
        if not 0 < p.mu < 2:
            raise DomainError(f"mu must lie in (0, 2), got {p.mu}")
        est = estimate_dimension(sample_trajectory(p, kind), **kw)
        rows.append({"nu": p.nu, "mu": p.mu, "dim": est.dim, "stderr": est.stderr,
                     "analytic": p.analytic_dim, "error": est.dim - p.analytic_dim})
    by_mu = sorted(rows, key=lambda r: r["mu"])
    dims = [r["dim"] for r in by_mu]
    monotone = all(b > a for a, b in zip(dims, dims[1:]))
    return {"rows": rows, "monotone_in_mu": monotone}
