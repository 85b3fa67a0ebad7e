"""Command line interface.

Exit codes: 0 success, 2 usage or domain error, 3 I/O error, 4 estimation
failure, 5 calibration miss.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import curve_zoo
from .dimension import DEFAULT_SEED, estimate_dimension
from .errors import (CalibrationError, DensityError, DomainError, EstimationError,
                     MemoryBudgetError, SpiralDimError)
from .phase_curve import sample_trajectory, write_csv
from .special_functions import BesselParams, gen_bessel
from .waviness import classify

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_ESTIMATION = 4
EXIT_CALIBRATION = 5

SEED_ENV = "SPIRALDIM_SEED"

# (curve, tolerance) rows of the calibration suite
CALIBRATION = [
    ("power_spiral_0.25", lambda: curve_zoo.power_spiral(0.25), 0.05),
    ("power_spiral_0.5", lambda: curve_zoo.power_spiral(0.5), 0.05),
    ("power_spiral_0.75", lambda: curve_zoo.power_spiral(0.75), 0.05),
    ("clothoid", curve_zoo.clothoid, 0.06),
    ("hopf", curve_zoo.hopf_trajectory, 0.06),
    ("synthetic_wavy", lambda: curve_zoo.synthetic_wavy(0.5, 1.0, 2.5), 0.06),
    ("segment", curve_zoo.segment, 0.02),
    ("circle", curve_zoo.circle, 0.02),
]


@dataclass
class RunConfig:
    command: str
    nu: float = 5.0
    mu: float = 1.0
    kind: str = "J"
    t0: float = 10.0
    T: float = 10000.0
    t: float | None = None
    method: str = "box"
    scales_decades: list | None = None
    n_scales: int | None = None
    offsets: int = 8
    seed: int = DEFAULT_SEED
    mu_list: list = field(default_factory=list)
    out: str | None = None
    svg: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("svg")
        return d


_DEFAULT_T = {"waviness": 500.0, "trajectory": 200.0}


def _floats(text):
    if isinstance(text, list):
        return [float(v) for v in text]
    return [float(v) for v in str(text).replace(",", " ").split()]


_CONVERT = {"nu": float, "mu": float, "t0": float, "T": float, "t": float, "kind": str, "method": str,
            "scales_decades": _floats, "n_scales": int, "offsets": int, "seed": int, "mu_list": _floats,
            "out": str, "svg": str}


def read_config(path: str) -> dict:
    """Flat ``key = value`` file, or the JSON report of an earlier run."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        raw = json.loads(text).get("config", {})
    else:
        raw = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            raw[k.replace("-", "_")] = v
    out = {}
    for k, v in raw.items():
        if k == "command" or v is None:
            continue
        if k not in _CONVERT:
            raise DomainError(f"unknown config key {k!r}")
        out[k] = _CONVERT[k](v)
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then SPIRALDIM_SEED, then the config file, then flags."""
    vals = {}
    if SEED_ENV in os.environ:
        vals["seed"] = int(os.environ[SEED_ENV])
    if args.command in _DEFAULT_T:
        vals["T"] = _DEFAULT_T[args.command]
    if getattr(args, "config", None):
        vals.update(read_config(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and f.name != "command":
            vals[f.name] = v
    return RunConfig(command=args.command, **vals)


def _params(cfg: RunConfig) -> BesselParams:
    return BesselParams(cfg.nu, cfg.mu, cfg.t0, cfg.T)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(payload: dict, path: str | None):
    text = json.dumps(_jsonable(payload), indent=2) + "\n"
    _write(text, path)


def _write(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# SVG ----------------------------------------------------------------------------

def svg_plot(series, xlabel="", ylabel="", markers=(), equal=False) -> str:
    """Line art in a 1000x1000 viewBox; ``series`` is a list of (x, y, colour)."""
    xs = np.concatenate([np.asarray(s[0], float) for s in series])
    ys = np.concatenate([np.asarray(s[1], float) for s in series])
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    if equal:
        c, h = 0.5 * (x0 + x1), 0.5 * max(x1 - x0, y1 - y0)
        d = 0.5 * (y0 + y1)
        x0, x1, y0, y1 = c - h, c + h, d - h, d + h
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    lo, span = 80.0, 860.0

    def px(x):
        return lo + span * (np.asarray(x, float) - x0) / (x1 - x0)

    def py(y):
        return lo + span * (1 - (np.asarray(y, float) - y0) / (y1 - y0))

    out = ['<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000">',
           '<rect width="1000" height="1000" fill="white"/>',
           f'<path d="M{lo},{lo + span} H{lo + span} M{lo},{lo + span} V{lo}" stroke="black" fill="none"/>']
    for k in range(6):
        fx = x0 + k * (x1 - x0) / 5
        fy = y0 + k * (y1 - y0) / 5
        X, Y = float(px(fx)), float(py(fy))
        out.append(f'<path d="M{X:.1f},{lo + span} v8 M{lo},{Y:.1f} h-8" stroke="black"/>')
        out.append(f'<text x="{X:.1f}" y="{lo + span + 28}" font-size="16" text-anchor="middle">{fx:.3g}</text>')
        out.append(f'<text x="{lo - 12}" y="{Y + 5:.1f}" font-size="16" text-anchor="end">{fy:.3g}</text>')
    out.append(f'<text x="500" y="990" font-size="20" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="20" y="500" font-size="20" transform="rotate(-90 20 500)" '
               f'text-anchor="middle">{ylabel}</text>')
    for x, y, colour in series:
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y)))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1"/>')
    for x, y, colour in markers:
        for a, b in zip(px(x), py(y)):
            out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{colour}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# commands -----------------------------------------------------------------------

def cmd_eval(cfg: RunConfig) -> int:
    if cfg.t is None:
        raise DomainError("--t is required")
    p = BesselParams(cfg.nu, cfg.mu)
    x, dx, ddx = gen_bessel(p, cfg.kind, cfg.t)
    r = math.hypot(x, dx)
    phi = math.atan2(dx, x)
    sys.stdout.write(",".join(f"{v:.17g}" for v in (x, dx, ddx, r, phi)) + "\n")
    return 0


def cmd_trajectory(cfg: RunConfig) -> int:
    tr = sample_trajectory(_params(cfg), cfg.kind)
    buf = io.StringIO()
    write_csv(tr, buf)
    _write(buf.getvalue(), cfg.out)
    if cfg.svg:
        _write(svg_plot([(tr.x, tr.y, "black")], "x", "dx", equal=True), cfg.svg)
    return 0


def _estimate(trace, cfg: RunConfig):
    return estimate_dimension(trace, method=cfg.method, scale_decades=cfg.scales_decades,
                              n_scales=cfg.n_scales, offsets=cfg.offsets, seed=cfg.seed)


def cmd_phase_dim(cfg: RunConfig) -> int:
    p = _params(cfg)
    tr = sample_trajectory(p, cfg.kind)
    est = _estimate(tr, cfg)
    wav = classify(tr)
    report = est.to_dict()
    report["analytic_dim"] = p.analytic_dim
    report["waviness"] = wav.to_dict()
    _emit({"config": cfg.to_dict(), "estimate": report}, cfg.out)
    if cfg.svg:
        x = np.log10(1 / est.scales)
        y = np.log10(est.counts if est.method == "box_count" else est.counts / est.scales ** 2)
        _write(svg_plot([(x, y, "black")], "log10(1/scale)", "log10 N", markers=[(x, y, "black")]), cfg.svg)
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.mu_list:
        raise DomainError("empty mu list")
    rows = []
    for mu in cfg.mu_list:
        row = {"mu": mu, "analytic": 4.0 / (4.0 - mu) if 0 < mu < 2 else None}
        try:
            if not 0 < mu < 2:
                raise DomainError(f"mu must lie in (0, 2), got {mu}")
            p = BesselParams(cfg.nu, mu, cfg.t0, cfg.T)
            est = _estimate(sample_trajectory(p, cfg.kind), cfg)
            row.update(dim=est.dim, stderr=est.stderr, error=est.dim - p.analytic_dim, status="ok")
        except SpiralDimError as exc:
            row.update(dim=None, stderr=None, error=None, status=f"failed: {exc}")
        rows.append(row)
    ok = [r for r in rows if r["status"] == "ok"]
    _emit({"config": cfg.to_dict(), "rows": rows}, cfg.out)
    if cfg.svg and ok:
        mus = np.linspace(min(cfg.mu_list), max(cfg.mu_list), 101)
        mus = mus[(mus > 0) & (mus < 2)]
        series = [(mus, 4 / (4 - mus), "gray"), ([r["mu"] for r in ok], [r["dim"] for r in ok], "black")]
        _write(svg_plot(series, "mu", "dimension", markers=[series[1]]), cfg.svg)
    return 0 if ok else EXIT_ESTIMATION


def cmd_calibrate(cfg: RunConfig) -> int:
    rows = []
    for name, make, tol in CALIBRATION:
        tr = make()
        try:
            est = _estimate(tr, cfg)
            bias = est.dim - tr.known_dim
            rows.append({"curve": name, "dim": est.dim, "known": tr.known_dim, "bias": bias,
                         "tolerance": tol, "passed": abs(bias) <= tol})
        except SpiralDimError as exc:
            rows.append({"curve": name, "dim": None, "known": tr.known_dim, "bias": None,
                         "tolerance": tol, "passed": False, "status": f"failed: {exc}"})
    _emit({"config": cfg.to_dict(), "rows": rows}, cfg.out)
    missed = [r["curve"] for r in rows if not r["passed"]]
    if missed:
        raise CalibrationError("missed tolerance: " + ", ".join(missed))
    return 0


def cmd_waviness(cfg: RunConfig) -> int:
    tr = sample_trajectory(_params(cfg), cfg.kind)
    rep = classify(tr)
    _emit({"config": cfg.to_dict(), "waviness": rep.to_dict()}, cfg.out)
    if cfg.svg:
        seq = np.asarray(rep.t_sequence[1:])
        marks = []
        if seq.size:
            odd, even = seq[0::2], seq[1::2]
            marks = [(odd, tr.radius_at(odd), "red"), (even, tr.radius_at(even), "blue")]
        _write(svg_plot([(tr.t, tr.r, "black")], "t", "r", markers=marks), cfg.svg)
    return 0


COMMANDS = {"eval": cmd_eval, "trajectory": cmd_trajectory, "phase-dim": cmd_phase_dim,
            "sweep": cmd_sweep, "calibrate": cmd_calibrate, "waviness": cmd_waviness}


def build_parser() -> argparse.ArgumentParser:
    epilog = ("exit codes: 0 ok, 2 usage or domain error, 3 I/O error, "
              "4 estimation failure, 5 calibration miss. "
              f"{SEED_ENV} overrides the default seed.")
    ap = argparse.ArgumentParser(prog="spiraldim", description="Phase-curve dimension toolkit.", epilog=epilog)
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file or earlier JSON report; flags take precedence")
    common.add_argument("--nu", type=float)
    common.add_argument("--mu", type=float)
    common.add_argument("--kind", choices=["J", "Y"])
    common.add_argument("--out", help="output file (default stdout)")

    rng = argparse.ArgumentParser(add_help=False)
    rng.add_argument("--t0", type=float)
    rng.add_argument("--T", type=float)

    est = argparse.ArgumentParser(add_help=False)
    est.add_argument("--method", choices=["box", "minkowski"])
    est.add_argument("--scales-decades", type=_floats, metavar="HI,LO",
                     help="log10 of the largest and smallest scale")
    est.add_argument("--n-scales", type=int)
    est.add_argument("--offsets", type=int)
    est.add_argument("--seed", type=int)
    est.add_argument("--svg")

    p = sub.add_parser("eval", parents=[common], help="print x, dx, ddx, r, phi at one t")
    p.add_argument("--t", type=float)
    p = sub.add_parser("trajectory", parents=[common, rng], help="write the sampled phase curve as CSV")
    p.add_argument("--svg")
    sub.add_parser("phase-dim", parents=[common, rng, est], help="dimension report for one trace")
    p = sub.add_parser("sweep", parents=[common, rng, est], help="dimension across a list of mu")
    p.add_argument("--mu-list", type=_floats, metavar="MU,...")
    sub.add_parser("calibrate", parents=[common, est], help="run the reference-curve calibration suite")
    p = sub.add_parser("waviness", parents=[common, rng], help="wave sequence and classification")
    p.add_argument("--svg")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (EstimationError, DensityError, MemoryBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
