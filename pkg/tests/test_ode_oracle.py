import json
import pathlib

import numpy as np
import pytest

from spiraldim.errors import DomainError
from spiraldim.ode_oracle import OdeState, integrate, integrate_batch
from spiraldim.special_functions import BesselParams, gen_bessel

DATA = pathlib.Path(__file__).parent / "data" / "ode_anchors.json"


def _anchors():
    return json.loads(DATA.read_text())


def test_classical_bessel_from_reference_start():
    # J_0 and J_0' at t = 1 (mpmath)
    init = OdeState(1.0, 0.76519768655796655, -0.44005058574493352)
    sol = integrate(BesselParams(0.0, 1.0, 1.0, 50.0), init, 50.0, tol=1e-12)
    # J_0(50), J_0'(50)
    x, dx = sol.final
    assert abs(x - 0.055812327669251815) < 1e-9
    assert abs(dx - 0.097511828125175138) < 1e-9


def test_batch_matches_reference_points():
    d = _anchors()
    rows = d["rows"][:20]
    nu = [r["nu"] for r in rows]
    mu = [r["mu"] for r in rows]
    sol = integrate_batch(nu, mu, [r["x0"] for r in rows], [r["dx0"] for r in rows], d["t0"], 100.0, tol=1e-12)
    for i, r in enumerate(rows):
        x, dx = sol(r["t"])
        amp = np.hypot(r["x"], r["dx"])
        assert abs(x[i] - r["x"]) / amp < 1e-8


def test_batch_equals_scalar_when_alone():
    p = BesselParams(2.0, 0.6, 10.0, 40.0)
    x0, dx0, _ = gen_bessel(p, "J", 10.0)
    a = integrate(p, OdeState(10.0, x0, dx0), 40.0)
    b = integrate_batch(2.0, 0.6, x0, dx0, 10.0, 40.0)
    assert np.array_equal(a.t, b.t)
    assert np.array_equal(a.x, b.x[:, 0])


def test_dense_output_and_states():
    p = BesselParams(1.0, 1.0, 10.0, 30.0)
    x0, dx0, _ = gen_bessel(p, "J", 10.0)
    sol = integrate(p, OdeState(10.0, x0, dx0), 30.0, tol=1e-11)
    assert np.all(np.diff(sol.t) > 0)
    st = sol.states
    assert st[0].t == 10.0 and st[-1].t == 30.0
    x, dx = sol(np.array([12.5, 25.0]))
    ref = gen_bessel(p, "J", np.array([12.5, 25.0]))
    assert np.max(np.abs(x - ref[0])) < 1e-8


@pytest.mark.parametrize("tol", [1e-15, 1e-2, 0.0])
def test_tolerance_range(tol):
    with pytest.raises(DomainError):
        integrate(BesselParams(1, 1), OdeState(10.0, 1.0, 0.0), 20.0, tol=tol)


def test_bad_states():
    with pytest.raises(DomainError):
        OdeState(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        integrate(BesselParams(1, 1), OdeState(10.0, 1.0, 0.0), 5.0)
