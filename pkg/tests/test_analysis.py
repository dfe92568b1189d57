import math

import numpy as np
import pytest

from jjarray.analysis import (
    MalformedCurveError,
    NotApplicableError,
    RegularityAssumptionError,
    bump_count,
    count_maxima,
    estimate_squid,
    faraway_prediction,
    junction_areas,
    magnetic_shift,
    period,
    rationalize,
    regularity_bounds,
    regularity_class,
    squid_extrema,
    squid_extrema_for,
    sup_gap,
)
from jjarray.implicit import gamma_max_implicit
from jjarray.magnetic import sweep_magnetic
from jjarray.model import GammaCurve, JunctionArray


@pytest.mark.parametrize(
    "spacings, expected",
    [((1.5, 5 / 3), 12 * math.pi), ((1.0, 3.0), 2 * math.pi), ((2.0,), math.pi), ((0.5, 1.5, 2.0), 4 * math.pi)],
)
def test_period(spacings, expected):
    arr = JunctionArray.from_spacings(1.0, spacings, 1.0, 20.0)
    p = period(arr)
    assert p.exact
    assert p.value == pytest.approx(expected, rel=1e-14)
    assert float(p) == p.value


def test_period_harmonic_reduces_to_smallest_spacing():
    arr = JunctionArray.from_spacings(0.5, (0.7, 2.1, 1.4), 1.0, 10.0)
    assert period(arr).value == pytest.approx(2 * math.pi / 0.7)


def test_period_irrational_flagged():
    arr = JunctionArray.from_spacings(1.0, (1.0, math.sqrt(2)), 1.0, 10.0)
    p = period(arr)
    assert not p.exact
    assert p.spacings[1].q <= 1000


def test_period_needs_two_junctions():
    with pytest.raises(NotApplicableError):
        period(JunctionArray((1.0,), (1.0,), 2.0))


def test_rationalize_coprime():
    r = rationalize(2.5)
    assert (r.p, r.q) == (5, 2) and math.gcd(r.p, r.q) == 1 and r.error == 0


def test_magnetic_shift_values():
    off = JunctionArray.from_spacings(0.1, (1.5, 2.5, 2.0), 1.0, 10.0, 1.0)
    assert magnetic_shift(off, 1.0) == pytest.approx(-0.19)
    assert magnetic_shift(off, 2.0) == pytest.approx(-0.38)
    assert magnetic_shift(off.with_feed(0.0), 2.0) == 0.0
    cen = JunctionArray.from_spacings(2.0, (1.5, 2.5, 2.0), 1.0, 10.0, 0.7)
    assert magnetic_shift(cen, 3.0) == pytest.approx(0.0, abs=1e-15)


def test_regularity_bounds():
    lo, hi = regularity_bounds(0.0357, 2.32)
    # the published upper value is truncated, not rounded, at 6 decimals
    assert lo == pytest.approx(0.032969, abs=1e-6)
    assert hi == pytest.approx(0.038923, abs=1e-6)
    lo, hi = regularity_bounds(0.2, 1e-9)
    assert lo == pytest.approx(0.2) and hi == pytest.approx(0.2)
    with pytest.raises(RegularityAssumptionError):
        regularity_bounds(0.5, 2.0)
    with pytest.raises(ValueError):
        regularity_bounds(-0.1, 1.0)
    assert regularity_class(0.0357, 0.0357, 2.32) == "spiked"
    assert regularity_class(0.0357, 0.06, 2.32) == "smooth"


def test_squid_extrema_symmetric_inline():
    e = squid_extrema(0.3, 0.3, 1.5, 2.0, 8.0, 0.0)
    assert e.H_at_max == pytest.approx(0.0, abs=1e-15)
    assert e.gamma_at_max == 0.6 and e.gamma_at_min == 0.0
    e1 = squid_extrema(0.3, 0.3, 1.5, 2.0, 8.0, 0.0, k=1)
    assert e1.H_at_max - e.H_at_max == pytest.approx(2 * math.pi / 1.5)


def test_squid_extrema_solver_check():
    arr = JunctionArray((3.0, 4.5), (0.2, 0.35), 9.0, 0.4)
    e = squid_extrema_for(arr)
    assert gamma_max_implicit(arr, e.H_at_max).gamma_max == pytest.approx(0.55, abs=1e-6)
    assert gamma_max_implicit(arr, e.H_at_min).gamma_max == pytest.approx(0.15, abs=1e-4)
    with pytest.raises(NotApplicableError):
        squid_extrema_for(JunctionArray((1.0, 2.0, 3.0), (1, 1, 1), 4.0))


def test_estimate_squid_algebra():
    c = GammaCurve.from_arrays([0, 1, 2], [2.0, 0.5, 1.0], [0, 0, 0], "x")
    est = estimate_squid(c)
    assert est.strengths == (0.75, 1.25)
    assert est.total == 2.0 and est.difference == 0.5 and est.regularity == "smooth"
    spiky = GammaCurve.from_arrays([0, 1], [2.0, 0.0], [0, 0], "x")
    assert estimate_squid(spiky).regularity == "spiked"


def test_estimate_squid_from_magnetic_curve_is_exact():
    arr = JunctionArray((1.0, 3.0), (0.4, 0.15), 5.0)
    H = np.linspace(0, math.pi, 201)  # includes both extrema of a period pi curve
    est = estimate_squid(sweep_magnetic(arr, H))
    assert est.strengths == pytest.approx((0.15, 0.4), abs=1e-12)


def test_estimate_squid_recovers_measured_areas():
    lam, strip = 5.6, 5.0
    areas = np.array([0.85255, 1.1417])
    d = areas / (strip * lam)
    arr = JunctionArray((2.0, 2.0 + 13 / lam), tuple(d), 10.0)
    H = np.linspace(0, 2 * math.pi / arr.spacings[0], 400)
    est = estimate_squid(sweep_magnetic(arr, H))
    np.testing.assert_allclose(junction_areas(est.strengths, strip, lam), areas, rtol=1e-4)


def test_estimate_squid_malformed():
    with pytest.raises(MalformedCurveError):
        estimate_squid(GammaCurve((), "x"))


def test_faraway_prediction():
    c = GammaCurve.from_arrays([0, 1, 2], [1.0, 1.5, 2.0], [0, 0, 0], "implicit")
    same = faraway_prediction(c, 0.0)
    np.testing.assert_array_equal(same.H, c.H)
    np.testing.assert_array_equal(same.gamma, c.gamma)
    p = faraway_prediction(c, 0.8)
    np.testing.assert_allclose(p.H, c.H + 0.4)
    assert p.gamma.max() == pytest.approx(c.gamma.max() + 0.8)
    with pytest.raises(NotApplicableError):
        faraway_prediction(c, 0.8, feed=0.5)


@pytest.mark.parametrize("k", [1, 3, 6])
def test_bump_count(k):
    arr = JunctionArray((1.0, 2.0, 2.0 + k), (1, 1, 1), 12.0)
    assert bump_count(arr) == k + 1


def test_bump_count_not_applicable():
    with pytest.raises(NotApplicableError):
        bump_count(JunctionArray((1.0, 2.0, 4.5), (1, 1, 1), 6.0))
    with pytest.raises(NotApplicableError):
        bump_count(JunctionArray((1.0, 2.0), (1, 1), 6.0))


def test_count_maxima_periodic_seam():
    x = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    assert count_maxima(np.cos(3 * x)) == 3
    assert count_maxima(np.cos(x)) == 1  # peak sits on the seam
    assert count_maxima(np.cos(x), periodic=False) == 0


def test_sup_gap_requires_same_fields():
    a = GammaCurve.from_arrays([0, 1], [1, 2], [0, 0], "a")
    b = GammaCurve.from_arrays([0, 1], [1.5, 2], [0, 0], "b")
    assert sup_gap(a, b) == 0.5
    with pytest.raises(ValueError):
        sup_gap(a, GammaCurve.from_arrays([0, 2], [1, 2], [0, 0], "c"))
