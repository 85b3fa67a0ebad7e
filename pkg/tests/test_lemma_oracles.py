import math

import pytest

from spiraldim.errors import DomainError
from spiraldim.lemma_oracles import (
    additive_tan_shift,
    cot_k0,
    cot_sign_changes,
    isosceles_inequality,
    phase_asymptotic_check,
    tan_perturbation,
    unique_cot_root,
)
from spiraldim.phase_curve import mirror, sample_trajectory
from spiraldim.special_functions import BesselParams


def test_isosceles_examples():
    s = isosceles_inequality(math.pi, 1.0)
    assert s.lhs == pytest.approx(math.pi) and s.rhs == pytest.approx(math.pi) and s.passed
    s = isosceles_inequality(0.0, 3.0)
    assert s.lhs == 0 and s.rhs == 0 and s.passed
    s = isosceles_inequality(math.pi / 2, 2.0)
    assert s.lhs == pytest.approx(math.pi)
    assert s.rhs == pytest.approx(math.pi * math.sqrt(2), rel=1e-15)
    with pytest.raises(DomainError):
        isosceles_inequality(4.0, 1.0)
    with pytest.raises(DomainError):
        isosceles_inequality(1.0, 0.0)


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_tan_perturbation_special_points(branch):
    for k in range(-3, 4):
        assert tan_perturbation(0.3, k * math.pi, branch)[0] == pytest.approx(0, abs=1e-15)
        assert tan_perturbation(0.3, k * math.pi + math.pi / 2, branch)[0] == 0.0


def test_tan_perturbation_solves_equation():
    y, bound = tan_perturbation(0.3, 1.0)
    assert abs(y) < bound == pytest.approx(0.3 * math.pi / 2)
    assert math.tan(1.0 + y) == pytest.approx(1.3 * math.tan(1.0), rel=1e-13)
    y, bound = tan_perturbation(0.3, 4.0, "minus")
    assert math.tan(4.0 - y) == pytest.approx(0.7 * math.tan(4.0), rel=1e-13)
    assert bound == pytest.approx(0.3 * math.pi)
    with pytest.raises(DomainError):
        tan_perturbation(0.7, 1.0, "minus")


def test_additive_shift():
    assert additive_tan_shift(0.0, 0.4) == 0.0
    assert additive_tan_shift(0.5, math.pi / 2) == 0.0
    y = additive_tan_shift(0.1, 0.7)
    assert abs(y) <= 0.1
    assert math.tan(0.7 + y) == pytest.approx(0.1 + math.tan(0.7), rel=1e-13)


def test_unique_cot_root():
    z = unique_cot_root(-1.0, 3)
    assert 3 * math.pi < z < 4 * math.pi
    assert abs(math.cos(z) + z * math.sin(z)) < 1e-12
    # roots approach the right end of their window
    gaps = [(k + 1) * math.pi - unique_cot_root(-1.0, k) for k in (5, 20, 80)]
    assert gaps[0] > gaps[1] > gaps[2]
    with pytest.raises(DomainError):
        unique_cot_root(0.5, 3)


def test_cot_windows_hold_one_root():
    for a in (-10.0, -1.0, -0.1):
        k0 = cot_k0(a)
        assert all(cot_sign_changes(a, k) == 1 for k in range(k0, k0 + 51))


def test_phase_asymptotics():
    tr = sample_trajectory(BesselParams(0.0, 1.0, 50.0, 5000.0), "J")
    c = phase_asymptotic_check(tr)
    assert c < 10
    assert phase_asymptotic_check(mirror(tr)) == pytest.approx(c)
    # a faster rate would keep residual * t**1.5 bounded; it grows instead
    short = sample_trajectory(BesselParams(0.0, 1.0, 50.0, 500.0), "J")
    assert phase_asymptotic_check(tr, power=1.5) > 2 * phase_asymptotic_check(short, power=1.5)
