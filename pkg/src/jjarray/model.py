"""Device and solution types for arrays of point Josephson junctions.

All quantities are dimensionless: lengths in units of the Josephson length,
fields and currents in the normalized units of the 1D delta model.  Physical
units only appear in :class:`PhysicalDevice` and :func:`normalize`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np


class InvalidDeviceError(ValueError):
    """Raised when device parameters violate the model's invariants."""


class GeometryError(ValueError):
    """Raised when an operation would move a junction out of the cavity."""


CENTER_TOL = 1e-12


def wrap_phase(phi):
    """Representative of ``phi`` modulo ``2 pi`` in ``[-pi, pi)``."""
    return (np.asarray(phi, dtype=float) + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class JunctionArray:
    """Junction positions ``a_i``, strengths ``d_i``, cavity length ``l`` and feed ``nu``.

    ``nu = 0`` is the inline feed, ``nu = 1`` the overlap feed.  Junctions may
    sit on the cavity edges (``a_1 = 0`` or ``a_n = l``); positions must be
    strictly increasing.
    """

    positions: tuple[float, ...]
    strengths: tuple[float, ...]
    length: float
    feed: float = 0.0

    def __post_init__(self):
        pos = tuple(float(a) for a in np.atleast_1d(self.positions))
        d = tuple(float(x) for x in np.atleast_1d(self.strengths))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "strengths", d)
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "feed", float(self.feed))

        if len(pos) == 0:
            raise InvalidDeviceError("at least one junction is required")
        if len(pos) != len(d):
            raise InvalidDeviceError(
                f"{len(pos)} positions but {len(d)} strengths"
            )
        if not all(np.isfinite(pos)) or not all(np.isfinite(d)):
            raise InvalidDeviceError("positions and strengths must be finite")
        if not self.length > 0:
            raise InvalidDeviceError(f"cavity length must be positive, got {self.length}")
        if any(x <= 0 for x in d):
            raise InvalidDeviceError("junction strengths must be strictly positive")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise InvalidDeviceError("positions must be strictly increasing")
        if pos[0] < 0 or pos[-1] > self.length:
            raise InvalidDeviceError(
                f"junctions must lie in [0, {self.length}], got {pos[0]}..{pos[-1]}"
            )
        if not 0.0 <= self.feed <= 1.0:
            raise InvalidDeviceError(f"feed must be in [0, 1], got {self.feed}")

    @property
    def n(self) -> int:
        return len(self.positions)

    @cached_property
    def a(self) -> np.ndarray:
        a = np.asarray(self.positions)
        a.flags.writeable = False
        return a

    @cached_property
    def d(self) -> np.ndarray:
        d = np.asarray(self.strengths)
        d.flags.writeable = False
        return d

    @cached_property
    def total_strength(self) -> float:
        """Upper bound on any static current, ``sum(d_i)``."""
        return float(sum(self.strengths))

    @cached_property
    def spacings(self) -> np.ndarray:
        h = np.diff(self.a)
        h.flags.writeable = False
        return h

    def with_feed(self, feed: float) -> "JunctionArray":
        return JunctionArray(self.positions, self.strengths, self.length, feed)

    def with_length(self, length: float) -> "JunctionArray":
        return JunctionArray(self.positions, self.strengths, length, self.feed)

    def scaled_strengths(self, factor: float) -> "JunctionArray":
        return JunctionArray(
            self.positions, tuple(factor * x for x in self.strengths), self.length, self.feed
        )

    def fingerprint(self) -> str:
        key = repr((self.positions, self.strengths, self.length, self.feed))
        return hashlib.sha1(key.encode()).hexdigest()[:12]

    @classmethod
    def from_spacings(
        cls,
        first: float,
        spacings: Sequence[float],
        strengths: Sequence[float] | float,
        length: float,
        feed: float = 0.0,
    ) -> "JunctionArray":
        """Build an array from the first position and the inter-junction gaps."""
        pos = first + np.concatenate([[0.0], np.cumsum(spacings)])
        if np.isscalar(strengths):
            strengths = [float(strengths)] * len(pos)
        return cls(tuple(pos), tuple(strengths), length, feed)


@dataclass(frozen=True)
class PhysicalDevice:
    """A device described in physical units (micrometres)."""

    lambda_j: float
    strip_width: float
    junction_sides: tuple[float, ...]
    positions: tuple[float, ...]
    length: float
    feed: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "junction_sides", tuple(map(float, self.junction_sides)))
        object.__setattr__(self, "positions", tuple(map(float, self.positions)))


def normalize(device: PhysicalDevice) -> JunctionArray:
    """Convert a physical device to the dimensionless model.

    Lengths are divided by ``lambda_J`` and ``d_i = w_j**2 / (w * lambda_J)``.
    """
    if not device.lambda_j > 0:
        raise InvalidDeviceError(f"lambda_J must be positive, got {device.lambda_j}")
    if not device.strip_width > 0:
        raise InvalidDeviceError(f"strip width must be positive, got {device.strip_width}")
    if not device.length > 0:
        raise InvalidDeviceError(f"length must be positive, got {device.length}")
    if any(not w > 0 for w in device.junction_sides):
        raise InvalidDeviceError("junction sides must be positive")
    lam = device.lambda_j
    d = tuple(w * w / (device.strip_width * lam) for w in device.junction_sides)
    pos = tuple(a / lam for a in device.positions)
    return JunctionArray(pos, d, device.length / lam, device.feed)


@dataclass(frozen=True)
class UnitGeometry:
    spacings: np.ndarray
    unit_length: float
    is_centered: bool


def junction_unit(array: JunctionArray) -> UnitGeometry:
    """Spacings, unit length ``l_b = a_n - a_1`` and whether the unit is centered."""
    a = array.a
    centered = abs((a[0] + a[-1]) / 2 - array.length / 2) <= CENTER_TOL
    return UnitGeometry(np.diff(a), float(a[-1] - a[0]), bool(centered))


def shift_unit(array: JunctionArray, c: float) -> JunctionArray:
    """Translate every junction by ``c``; the result must stay strictly inside (0, l)."""
    pos = array.a + c
    if pos[0] <= 0 or pos[-1] >= array.length:
        raise GeometryError(
            f"shift {c} moves junctions to [{pos[0]}, {pos[-1]}], outside (0, {array.length})"
        )
    return JunctionArray(tuple(pos), array.strengths, array.length, array.feed)


def centering_shift(array: JunctionArray) -> float:
    """The translation that centers the junction unit in the cavity."""
    a = array.a
    return array.length / 2 - (a[0] + a[-1]) / 2


def centered(array: JunctionArray) -> JunctionArray:
    a = array.a + centering_shift(array)
    return JunctionArray(tuple(a), array.strengths, array.length, array.feed)


@dataclass(frozen=True)
class UnitReduction:
    sub_array: JunctionArray
    mu: float


def reduce_to_unit(array: JunctionArray) -> UnitReduction:
    """Equivalent problem posed on the junction unit itself.

    For a centered unit the cavity ``[0, l]`` can be replaced by ``[a_1, a_n]``
    with effective feed ``mu = nu * l_b / l``.  The returned sub-array has its
    first junction at 0 and its last at ``l_b``.
    """
    if array.n < 2:
        raise GeometryError("unit reduction needs at least two junctions (l_b = 0)")
    geo = junction_unit(array)
    if not geo.is_centered:
        raise GeometryError("unit reduction requires a centered array; use shift_unit first")
    mu = array.feed * geo.unit_length / array.length
    sub = JunctionArray(
        tuple(array.a - array.a[0]), array.strengths, geo.unit_length, mu
    )
    return UnitReduction(sub, mu)


@dataclass(frozen=True)
class SegmentPoly:
    """``c2*x**2 + c1*x + c0`` on ``[x_lo, x_hi]`` (expanded about x = 0)."""

    x_lo: float
    x_hi: float
    c2: float
    c1: float
    c0: float

    def __call__(self, x):
        return (self.c2 * x + self.c1) * x + self.c0

    def derivative(self, x):
        return 2 * self.c2 * x + self.c1


@dataclass(frozen=True)
class PhaseSolution:
    """A candidate static phase built from ``(phi_1, gamma, H)``.

    It is a true solution only when :meth:`residual` vanishes; see
    :func:`jjarray.piecewise.boundary_residual`.
    """

    array: JunctionArray
    H: float
    gamma: float
    junction_phases: np.ndarray
    segment_polys: tuple[SegmentPoly, ...]

    @property
    def phi1(self) -> float:
        return float(self.junction_phases[0])

    def residual(self) -> float:
        """Right boundary mismatch ``phi'(l) - H - (1 - nu) gamma / 2`` from the stored segments."""
        nu = self.array.feed
        return float(
            self.segment_polys[-1].derivative(self.array.length)
            - self.H
            - (1 - nu) * self.gamma / 2
        )

    def jumps(self) -> np.ndarray:
        """Slope jumps ``P'_{k+1}(a_k) - P'_k(a_k)`` at each junction."""
        a = self.array.a
        p = self.segment_polys
        return np.array([p[k + 1].derivative(a[k]) - p[k].derivative(a[k]) for k in range(len(a))])

    def current(self) -> float:
        """``sum(d_i sin(phi_i))``, equal to gamma for a true solution."""
        return float(np.dot(self.array.d, np.sin(self.junction_phases)))

    def shifted(self, k: int) -> "PhaseSolution":
        """The same solution with ``2*pi*k`` added to the phase everywhere."""
        off = 2 * np.pi * k
        polys = tuple(
            SegmentPoly(p.x_lo, p.x_hi, p.c2, p.c1, p.c0 + off) for p in self.segment_polys
        )
        return PhaseSolution(self.array, self.H, self.gamma, self.junction_phases + off, polys)

    def check(self, tol: float = 1e-8) -> None:
        """Assert continuity, curvature, jump and current-conservation invariants."""
        arr = self.array
        p = self.segment_polys
        curv = -arr.feed * self.gamma / (2 * arr.length)
        for k, ak in enumerate(arr.a):
            left, right = p[k](ak), p[k + 1](ak)
            # expanded coefficients cancel at a_k; compare against the term sizes
            scale = max(1.0, *(abs(q.c2) * ak * ak + abs(q.c1 * ak) + abs(q.c0) for q in p[k : k + 2]))
            if abs(left - right) > 1e-12 * scale:
                raise AssertionError(f"phase discontinuous at a_{k + 1}: {left} vs {right}")
        for q in p:
            if q.c2 != curv:
                raise AssertionError(f"segment curvature {q.c2} != {curv}")
        expected = arr.d * np.sin(self.junction_phases)
        if np.max(np.abs(self.jumps() - expected)) > tol:
            raise AssertionError("slope jumps do not match d_i sin(phi_i)")
        if abs(self.current() - self.gamma) > tol:
            raise AssertionError(
                f"current not conserved: sum d sin phi = {self.current()}, gamma = {self.gamma}"
            )


@dataclass(frozen=True)
class CurvePoint:
    H: float
    gamma_max: float
    phi1_at_max: float
    flags: str = ""


@dataclass(frozen=True)
class GammaCurve:
    """Sampled ``gamma_max(H)`` with the method that produced it."""

    points: tuple[CurvePoint, ...]
    method: str
    fingerprint: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        H = [p.H for p in pts]
        if any(b <= a for a, b in zip(H, H[1:])):
            raise ValueError("curve H values must be strictly increasing")
        if any(p.gamma_max < 0 for p in pts):
            raise ValueError("gamma_max must be non-negative")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def H(self) -> np.ndarray:
        return np.array([p.H for p in self.points])

    @property
    def gamma(self) -> np.ndarray:
        return np.array([p.gamma_max for p in self.points])

    @property
    def phi1(self) -> np.ndarray:
        return np.array([p.phi1_at_max for p in self.points])

    @property
    def flags(self) -> list[str]:
        return [p.flags for p in self.points]

    @classmethod
    def from_arrays(cls, H, gamma, phi1, method, fingerprint="", flags=None) -> "GammaCurve":
        flags = flags if flags is not None else [""] * len(H)
        pts = tuple(
            CurvePoint(float(h), float(g), float(p), f) for h, g, p, f in zip(H, gamma, phi1, flags)
        )
        return cls(pts, method, fingerprint)
