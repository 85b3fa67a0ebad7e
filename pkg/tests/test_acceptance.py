"""End-to-end acceptance checks; each prints one PASS/FAIL line."""

import json
import math
import pathlib
import time

import numpy as np
import pytest

from spiraldim import cli
from spiraldim.curve_zoo import clothoid, hopf_trajectory, power_spiral, synthetic_wavy
from spiraldim.dimension import estimate_dimension
from spiraldim.lemma_oracles import cot_suite, tan_suite, triangle_suite
from spiraldim.ode_oracle import integrate_batch
from spiraldim.phase_curve import angle_law_profile, angular_parameter, excise, monotone_tail, sample_trajectory
from spiraldim.special_functions import BesselParams, bessel_j, bessel_j_prime, bessel_y, bessel_y_prime, gen_bessel
from spiraldim.waviness import classify

DATA = pathlib.Path(__file__).parent / "data"
NU_GRID = (0.0, 0.5, 1.0, 2.0, 5.0)
MU_GRID = (0.2, 0.6, 1.0, 1.4, 1.8)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def test_criterion_01_reference_spiral(report, tmp_path):
    out = tmp_path / "pd.json"
    t0 = time.perf_counter()
    rc = cli.main(["phase-dim", "--nu", "5", "--mu", "1", "--t0", "10", "--T", "10000", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    dim = json.loads(out.read_text())["estimate"]["dim"] if rc == 0 else math.nan
    ok = rc == 0 and abs(dim - 4 / 3) <= 0.08 and elapsed < 120
    report(1, ok, f"dim={dim:.4f} target=4/3 tol=0.08 time={elapsed:.1f}s")


def test_criterion_02_mu_sweep(report, tmp_path):
    out = tmp_path / "sweep.json"
    rc = cli.main(["sweep", "--nu", "5", "--mu-list", "0.2,0.6,1.0,1.4,1.8", "--t0", "10", "--T", "10000",
                   "--out", str(out)])
    rows = json.loads(out.read_text())["rows"] if rc == 0 else []
    dims = [r["dim"] for r in rows]
    errs = [r["dim"] - 4 / (4 - r["mu"]) for r in rows]
    ok = (rc == 0 and len(rows) == 5 and all(abs(e) <= 0.08 for e in errs)
          and all(b > a for a, b in zip(dims, dims[1:])))
    report(2, ok, "dims=" + ",".join(f"{d:.4f}" for d in dims) + " errors=" + ",".join(f"{e:+.4f}" for e in errs))


def test_criterion_03_power_spirals(report):
    parts, ok = [], True
    for a in (0.25, 0.5, 0.75):
        tr = power_spiral(a)
        target = 2 / (1 + a)
        box = estimate_dimension(tr, "box").dim
        mink = estimate_dimension(tr, "minkowski").dim
        ok &= abs(box - target) <= 0.05 and abs(mink - target) <= 0.05 and abs(box - mink) <= 0.04
        parts.append(f"a={a}: box={box:.4f} mink={mink:.4f} target={target:.4f}")
    report(3, ok, "; ".join(parts))


def test_criterion_04_synthetic_wavy(report):
    fast = synthetic_wavy(0.5, 1.0, 2.5)
    dim = estimate_dimension(fast, "box").dim
    wavy = classify(fast)
    slow = classify(synthetic_wavy(0.5, 1.0, 1.5))
    ok = (abs(dim - 4 / 3) <= 0.06 and wavy.is_wavy and not slow.is_wavy
          and not slow.checks["iii_decay"])
    report(4, ok, f"dim={dim:.4f} wavy={wavy.is_wavy} beta={wavy.decay_exponent_fit:.3f}; "
                  f"slow variant wavy={slow.is_wavy} iii={slow.checks['iii_decay']} "
                  f"beta={slow.decay_exponent_fit:.3f}")


def test_criterion_05_waviness_grid(report):
    wrong = []
    for nu in NU_GRID:
        for mu in MU_GRID:
            rep = classify(sample_trajectory(BesselParams(nu, mu, 10.0, 500.0), "J"))
            if rep.is_wavy != (nu != 0):
                wrong.append((nu, mu))
    report(5, not wrong, f"{25 - len(wrong)}/25 grid points classified as nu != 0; mismatches={wrong}")


def test_criterion_06_envelope_and_angle(report):
    t = np.linspace(5000.0, 1e4, 20001)
    lo, hi, worst_growth = math.inf, -math.inf, 0.0
    for nu in NU_GRID:
        for mu in MU_GRID:
            p = BesselParams(nu, mu, 10.0, 1e4)
            x, dx, _ = gen_bessel(p, "J", t)
            env = (x * x + dx * dx) * t ** (2 - mu) * math.pi / 2
            lo, hi = min(lo, env.min()), max(hi, env.max())
            tt, scaled = angle_law_profile(sample_trajectory(p.with_range(1000.0, 1e4), "J"))
            early = scaled[(tt >= 1000) & (tt < 3000)].max()
            late = scaled[tt >= 5000].max()
            worst_growth = max(worst_growth, late / early)
    ok = lo >= 0.98 and hi <= 1.02 and worst_growth < 1.1
    report(6, ok, f"envelope range [{lo:.5f}, {hi:.5f}]; "
                  f"max late/early scaled angle residual={worst_growth:.4f}")


def test_criterion_07_special_function_accuracy(report):
    d = json.loads((DATA / "ode_anchors.json").read_text())
    rows = d["rows"]
    sol = integrate_batch([r["nu"] for r in rows], [r["mu"] for r in rows], [r["x0"] for r in rows],
                          [r["dx0"] for r in rows], d["t0"], 100.0, tol=1e-12)
    ode_err = lib_err = 0.0
    for i, r in enumerate(rows):
        amp = math.hypot(r["x"], r["dx"])
        x_ode = sol(r["t"])[0][i]
        x_lib = float(gen_bessel(BesselParams(r["nu"], r["mu"]), "J", r["t"])[0])
        ode_err = max(ode_err, abs(x_ode - x_lib) / amp)
        lib_err = max(lib_err, abs(x_lib - r["x"]) / amp)
    t = np.linspace(5.0, 200.0, 400)
    w_err = 0.0
    for nu in (0.0, 0.5, 1.0, 2.5, 5.0):
        w = bessel_j(nu, t) * bessel_y_prime(nu, t) - bessel_j_prime(nu, t) * bessel_y(nu, t)
        w_err = max(w_err, float(np.max(np.abs(w * math.pi * t / 2 - 1))))
    ok = ode_err < 1e-8 and lib_err < 1e-8 and w_err < 1e-8
    report(7, ok, f"ode-vs-library={ode_err:.2e} library-vs-reference={lib_err:.2e} wronskian={w_err:.2e}")


def test_criterion_08_excision(report):
    tr = sample_trajectory(BesselParams(5.0, 1.0, 10.0, 1e4), "J")
    start = monotone_tail(tr)
    t_cut = float(np.interp(tr.t_start + 2 * math.pi, angular_parameter(tr)[start:], tr.t[start:]))
    full = estimate_dimension(tr, "box")
    decades = (math.log10(full.scales[0]), math.log10(full.scales[-1]))
    cut = estimate_dimension(excise(tr, t_cut), "box", scale_decades=decades, n_scales=full.scales.size)
    diff = abs(full.dim - cut.dim)
    report(8, diff < 0.01, f"t_cut={t_cut:.4f} full={full.dim:.5f} excised={cut.dim:.5f} diff={diff:.2e}")


def test_criterion_09_lemma_suites(report):
    t0 = time.perf_counter()
    tri = triangle_suite(100_000)
    tan = tan_suite(10_000)
    cot = cot_suite(50)
    elapsed = time.perf_counter() - t0
    ok = tri == 0 and all(v == 0 for v in tan.values()) and cot == 0 and elapsed < 30
    report(9, ok, f"triangle={tri} tan={tan} cot={cot} time={elapsed:.2f}s")


def test_criterion_10_clothoid_and_hopf(report):
    c = estimate_dimension(clothoid(), "box").dim
    h = estimate_dimension(hopf_trajectory(), "box").dim
    ok = abs(c - 4 / 3) <= 0.06 and abs(h - 4 / 3) <= 0.06
    report(10, ok, f"clothoid={c:.4f} hopf={h:.4f} target=4/3 tol=0.06")
