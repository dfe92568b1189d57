"""Structural predictions for ``gamma_max(H)`` and two-junction inverse tools."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.signal import find_peaks

from .model import GammaCurve, JunctionArray, junction_unit


class NotApplicableError(ValueError):
    """The analysis does not apply to this device."""


class RegularityAssumptionError(ValueError):
    """``d_1 l_1 >= 1``: the regularity bounds are not defined."""


class MalformedCurveError(ValueError):
    pass


@dataclass(frozen=True)
class RationalSpacing:
    p: int
    q: int
    error: float

    @property
    def value(self) -> float:
        return self.p / self.q


@dataclass(frozen=True)
class PeriodEstimate:
    """Field period ``2 pi LCM(q_j) / HCF(p_j)`` of the spacings ``l_j = p_j / q_j``.

    ``exact`` is False when some spacing had no rational approximation within
    tolerance; ``value`` then comes from the best approximations found and the
    curve is only approximately periodic.
    """

    value: float
    exact: bool
    spacings: tuple[RationalSpacing, ...]

    def __float__(self) -> float:
        return self.value


def rationalize(x: float, tol: float = 1e-9, max_denominator: int = 1000) -> RationalSpacing:
    """Best rational approximation with bounded denominator (continued fractions)."""
    fr = Fraction(x).limit_denominator(max_denominator)
    return RationalSpacing(fr.numerator, fr.denominator, abs(x - fr.numerator / fr.denominator))


def period(array: JunctionArray, rational_tol: float = 1e-9, max_denominator: int = 1000) -> PeriodEstimate:
    if array.n < 2:
        raise NotApplicableError("a single junction has a constant gamma_max; no period")
    rs = tuple(rationalize(h, rational_tol, max_denominator) for h in array.spacings)
    lcm_q = reduce(math.lcm, (r.q for r in rs))
    hcf_p = reduce(math.gcd, (r.p for r in rs))
    exact = all(r.error <= rational_tol * max(1.0, r.value) for r in rs)
    return PeriodEstimate(2 * math.pi * lcm_q / hcf_p, exact, rs)


def magnetic_shift(array: JunctionArray, gamma: float) -> float:
    """Field offset ``H_nu`` between a centered unit and this placement at current ``gamma``.

    A point ``(H, gamma)`` on the centered device's curve maps to
    ``(H + H_nu, gamma)`` on this one.
    """
    return magnetic_shift_coefficient(array) * gamma


def magnetic_shift_coefficient(array: JunctionArray) -> float:
    """``H_nu / gamma = nu ((l_b - l) / 2 + a_1) / l``."""
    lb = junction_unit(array).unit_length
    return array.feed * ((lb - array.length) / 2 + array.a[0]) / array.length + 0.0


def regularity_bounds(d1: float, l1: float) -> tuple[float, float]:
    """Interval of ``d_2`` for which a two-junction curve has slope jumps.

    Outside ``[d1 / (1 + d1 l1), d1 / (1 - d1 l1)]`` the curve is smooth.
    """
    if not (d1 > 0 and l1 > 0):
        raise ValueError("d1 and l1 must be positive")
    if d1 * l1 >= 1:
        raise RegularityAssumptionError(f"d1*l1 = {d1 * l1} >= 1; upper bound undefined")
    return d1 / (1 + d1 * l1), d1 / (1 - d1 * l1)


def regularity_class(d1: float, d2: float, l1: float) -> str:
    lo, hi = regularity_bounds(d1, l1)
    return "spiked" if lo <= d2 <= hi else "smooth"


@dataclass(frozen=True)
class SquidExtrema:
    H_at_max: float
    H_at_min: float
    gamma_at_max: float
    gamma_at_min: float


def squid_extrema(d1: float, d2: float, l1: float, a1: float, l: float, nu: float, k: int = 0) -> SquidExtrema:
    """Fields where a two-junction curve reaches ``d1 + d2`` and ``|d1 - d2|``.

    The maximum has both phases at ``pi/2``; the minimum has the stronger
    junction at ``pi/2`` and the weaker at ``-pi/2``.
    """
    w = nu * (a1 + l1 / 2) + (1 - nu) * l / 2
    H_max = 2 * k * math.pi / l1 + w * (d1 + d2) / l - d1
    if d1 >= d2:
        H_min = (2 * k + 1) * math.pi / l1 + w * (d1 - d2) / l - d1
    else:
        H_min = (2 * k + 1) * math.pi / l1 + w * (d2 - d1) / l + d1
    return SquidExtrema(H_max, H_min, d1 + d2, abs(d1 - d2))


def squid_extrema_for(array: JunctionArray, k: int = 0) -> SquidExtrema:
    if array.n != 2:
        raise NotApplicableError("extrema table applies to two-junction devices")
    d1, d2 = array.strengths
    return squid_extrema(d1, d2, float(array.spacings[0]), array.positions[0], array.length, array.feed, k)


@dataclass(frozen=True)
class SquidEstimate:
    """Junction strengths recovered from a SQUID curve, as an unordered pair.

    ``strengths`` is sorted; the curve cannot tell which junction is which.
    """

    strengths: tuple[float, float]
    total: float
    difference: float
    regularity: str

    def __post_init__(self):
        object.__setattr__(self, "strengths", tuple(sorted(self.strengths)))


def estimate_squid(curve: GammaCurve, classification_tol: float | None = None) -> SquidEstimate:
    """Strengths from the curve envelope: max is ``d1 + d2``, min is ``|d1 - d2|``.

    ``classification_tol`` defaults to ``1e-3 * max``; a minimum below it is
    reported as ``spiked`` (near-equal junctions).
    """
    g = curve.gamma
    if len(g) == 0:
        raise MalformedCurveError("empty curve")
    hi, lo = float(np.max(g)), float(np.min(g))
    if hi < lo or lo < 0:
        raise MalformedCurveError(f"inconsistent envelope max={hi}, min={lo}")
    tol = 1e-3 * hi if classification_tol is None else classification_tol
    return SquidEstimate(((hi + lo) / 2, (hi - lo) / 2), hi, lo, "spiked" if lo < tol else "smooth")


def junction_areas(strengths, strip_width: float, lambda_j: float) -> np.ndarray:
    """Junction areas ``w_i**2 = d_i * w * lambda_J``, undoing the normalization."""
    return np.asarray(strengths, dtype=float) * strip_width * lambda_j


def faraway_prediction(unit_curve: GammaCurve, d_far: float, feed: float = 0.0) -> GammaCurve:
    """Curve predicted after adding a distant junction of strength ``d_far``.

    Every point ``(H, g)`` of the unit curve moves to ``(H + d_far/2, g + d_far)``.
    The limit holds for inline feed only; other feeds raise
    :class:`NotApplicableError` (compare curves with :func:`sup_gap` instead).
    """
    if feed != 0:
        raise NotApplicableError("the faraway-junction limit is exact for inline feed (nu = 0) only")
    return GammaCurve.from_arrays(
        unit_curve.H + d_far / 2,
        unit_curve.gamma + d_far,
        unit_curve.phi1,
        f"faraway({unit_curve.method})",
        unit_curve.fingerprint,
        unit_curve.flags,
    )


def bump_count(array: JunctionArray, tol: float = 1e-9) -> int:
    """Heuristic number of maxima per period for a harmonic three-junction array.

    With ``l_2 = k l_1`` the expected count is ``k + 1``.  The estimate is
    approximate by nature and only defined for integer ``k``.
    """
    if array.n != 3:
        raise NotApplicableError("bump count heuristic needs exactly three junctions")
    l1, l2 = array.spacings
    k = l2 / l1
    if abs(k - round(k)) > tol * max(1.0, k) or round(k) < 1:
        raise NotApplicableError(f"l2/l1 = {k} is not a positive integer")
    return int(round(k)) + 1


def count_maxima(gamma: np.ndarray, prominence: float = 1e-3, periodic: bool = True) -> int:
    """Local maxima of a sampled curve with at least the given prominence.

    With ``periodic=True`` the samples are taken to cover exactly one period
    (the endpoint excluded) and peaks across the seam are counted once.
    """
    g = np.asarray(gamma, dtype=float)
    if not periodic:
        return len(find_peaks(g, prominence=prominence)[0])
    n = len(g)
    tiled = np.concatenate([g, g, g])
    peaks, _ = find_peaks(tiled, prominence=prominence)
    return int(np.sum((peaks >= n) & (peaks < 2 * n)))


def sup_gap(a: GammaCurve, b: GammaCurve) -> float:
    """Max pointwise difference of two curves sampled at the same fields."""
    if len(a) != len(b) or not np.allclose(a.H, b.H, rtol=0, atol=1e-12):
        raise ValueError("curves are not sampled on the same fields")
    return float(np.max(np.abs(a.gamma - b.gamma)))
