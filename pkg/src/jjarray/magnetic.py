"""Magnetic approximation: the phase is taken linear, ``phi(x) = H x + c``.

Only the offset ``c`` is free, so the maximal current is the modulus of the
phasor sum ``sum(d_i exp(i H a_i))``.  The result ignores ``nu`` and ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GammaCurve, JunctionArray, wrap_phase

DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class MagneticResult:
    gamma_max: float
    c_max: float
    contributions: np.ndarray
    degenerate: bool = False


def _sums(array: JunctionArray, H):
    Ha = np.multiply.outer(np.asarray(H, dtype=float), array.a)
    return (array.d * np.cos(Ha)).sum(axis=-1), (array.d * np.sin(Ha)).sum(axis=-1)


def gamma_of_offset(array: JunctionArray, H: float, c):
    """Current ``sum(d_i sin(H a_i + c))`` carried by the linear phase."""
    c = np.asarray(c, dtype=float)
    return (array.d * np.sin(H * array.a + c[..., None])).sum(axis=-1)


def c_max(array: JunctionArray, H: float) -> tuple[float, bool]:
    """Offset maximizing the current, and whether the interference is total.

    Of the two stationary offsets ``c`` and ``c + pi`` this returns the one
    giving a positive current.  When both phasor sums vanish every offset
    gives zero current and ``(0.0, True)`` is returned.
    """
    A, B = _sums(array, H)
    if np.hypot(A, B) <= DEGENERATE_TOL * array.total_strength:
        return 0.0, True
    return float(np.arctan2(A, B)), False


def gamma_max_magnetic(array: JunctionArray, H: float) -> MagneticResult:
    c, degenerate = c_max(array, H)
    contrib = array.d * np.sin(H * array.a + c)
    if degenerate:
        return MagneticResult(0.0, c, contrib, True)
    return MagneticResult(abs(float(contrib.sum())), c, contrib)


def gamma_max_magnetic_values(array: JunctionArray, H) -> np.ndarray:
    """Vectorized ``gamma_max`` for many fields (the phasor modulus)."""
    A, B = _sums(array, H)
    return np.hypot(A, B)


def sweep_magnetic(array: JunctionArray, H_list) -> GammaCurve:
    H = np.sort(np.asarray(H_list, dtype=float))
    results = [gamma_max_magnetic(array, h) for h in H]
    return GammaCurve.from_arrays(
        H,
        [r.gamma_max for r in results],
        wrap_phase([h * array.a[0] + r.c_max for h, r in zip(H, results)]),
        "magnetic",
        array.fingerprint(),
        flags=["degenerate" if r.degenerate else "" for r in results],
    )


def deviation_bound(array: JunctionArray) -> float:
    """``n * l_b * sum(d)``: bound on the junction-phase deviation from the linear ansatz.

    Reported as a diagnostic only; it bounds phases, not currents.
    """
    a = array.a
    return float(array.n * (a[-1] - a[0]) * array.total_strength)
