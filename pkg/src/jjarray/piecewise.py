"""Exact piecewise-quadratic phase from the left boundary data.

Between junctions the phase satisfies ``-phi'' = nu * gamma / l``; across
junction ``k`` the slope jumps by ``d_k sin(phi_k)``.  Given ``phi_1``,
``gamma`` and ``H`` the left boundary condition fixes everything, so whether
``(phi_1, gamma)`` is a static solution reduces to one scalar equation at
the right boundary.
"""

from __future__ import annotations

import numpy as np

from .model import JunctionArray, PhaseSolution, SegmentPoly


def build_solution(array: JunctionArray, H: float, gamma: float, phi1: float) -> PhaseSolution:
    """Integrate the junction recurrence and return all ``n + 1`` segments.

    The first segment passes through ``phi1`` at ``a_1`` with slope
    ``H - (1 - nu) gamma / 2`` at ``x = 0``.  Each following segment equals the
    previous one plus ``d_k sin(phi_k) (x - a_k)``.
    """
    a, d, l, nu = array.a, array.d, array.length, array.feed
    c2 = -nu * gamma / (2 * l)
    c1 = H - (1 - nu) * gamma / 2
    c0 = phi1 - c2 * a[0] ** 2 - c1 * a[0]

    edges = np.concatenate([[0.0], a, [l]])
    polys = [SegmentPoly(edges[0], edges[1], c2, c1, c0)]
    phases = np.empty(array.n)
    for k in range(array.n):
        # evaluate phi_k on the left polynomial; phi_1 is pinned exactly
        phik = phi1 if k == 0 else polys[k](a[k])
        phases[k] = phik
        jump = d[k] * np.sin(phik)
        c1 = c1 + jump
        c0 = c0 - jump * a[k]
        polys.append(SegmentPoly(edges[k + 1], edges[k + 2], c2, c1, c0))
    return PhaseSolution(array, float(H), float(gamma), phases, tuple(polys))


def eval_phase(solution: PhaseSolution, x: float) -> float:
    """Phase at ``x``; at a junction the value is ``phi_i`` (both sides agree)."""
    l = solution.array.length
    if not 0.0 <= x <= l:
        raise ValueError(f"x = {x} outside [0, {l}]")
    k = int(np.searchsorted(solution.array.a, x, side="right"))
    if k > 0 and x == solution.array.a[k - 1]:
        return float(solution.junction_phases[k - 1])
    return float(solution.segment_polys[k](x))


def eval_slope(solution: PhaseSolution, x: float) -> float:
    """Right-sided derivative ``phi'(x+)`` (left-sided at ``x = l``)."""
    l = solution.array.length
    if not 0.0 <= x <= l:
        raise ValueError(f"x = {x} outside [0, {l}]")
    k = int(np.searchsorted(solution.array.a, x, side="right"))
    return float(solution.segment_polys[k].derivative(x))


def eval_heaviside(solution: PhaseSolution, x):
    """Phase from the closed sum ``P_1(x) + sum_i H(x - a_i) d_i sin(phi_i) (x - a_i)``."""
    arr = solution.array
    x = np.asarray(x, dtype=float)
    p1 = solution.segment_polys[0]
    steps = (x[..., None] >= arr.a) * arr.d * np.sin(solution.junction_phases) * (x[..., None] - arr.a)
    return p1(x) + steps.sum(axis=-1)


def junction_phases(array: JunctionArray, H, gamma, phi1):
    """Vectorized junction phases and the right-boundary slope.

    Uses the local form of the recurrence (polynomials about ``a_k``), which
    is a separate code path from :func:`build_solution`.  ``H``, ``gamma`` and
    ``phi1`` broadcast together.  Returns ``(phases, slope_at_l)`` where
    ``phases`` has a trailing axis of length ``n``.
    """
    a, d, l, nu = array.a, array.d, array.length, array.feed
    H, gamma, phi1 = np.broadcast_arrays(
        np.asarray(H, dtype=float), np.asarray(gamma, dtype=float), np.asarray(phi1, dtype=float)
    )
    curv = nu * gamma / l
    slope = H - (1 - nu) * gamma / 2 - curv * a[0]  # phi'(a_1^-)
    phi = phi1
    out = np.empty(phi1.shape + (array.n,))
    for k in range(array.n):
        out[..., k] = phi
        slope = slope + d[k] * np.sin(phi)  # phi'(a_k^+)
        if k + 1 < array.n:
            h = a[k + 1] - a[k]
            phi = phi + slope * h - curv * h * h / 2
            slope = slope - curv * h
    slope_l = slope - curv * (l - a[-1])
    return out, slope_l


def boundary_residual(array: JunctionArray, H, gamma, phi1):
    """``R = P'_{n+1}(l) - H - (1 - nu) gamma / 2``; zero exactly for static solutions.

    Vectorized over broadcastable ``H``, ``gamma`` and ``phi1``.  Integrating
    the equation over the cavity shows ``R = sum(d_i sin(phi_i)) - gamma``, so
    ``R >= 0`` at ``gamma = -sum(d)`` and ``R <= 0`` at ``gamma = +sum(d)``.
    """
    gamma = np.asarray(gamma, dtype=float)
    _, slope_l = junction_phases(array, H, gamma, phi1)
    r = slope_l - np.asarray(H, dtype=float) - (1 - array.feed) * gamma / 2
    return r if np.ndim(r) else float(r)


def explicit_P3_prime(array: JunctionArray, H: float, gamma: float, phi1: float, x):
    """Closed-form ``P_3'(x)`` for a two-junction device."""
    if array.n != 2:
        raise ValueError(f"explicit P3' needs exactly 2 junctions, got {array.n}")
    a1, a2 = array.positions
    d1, d2 = array.strengths
    l, nu = array.length, array.feed
    s1 = np.sin(phi1)
    base = H - (1 - nu) * gamma / 2
    C1 = (d1 * s1 - nu * gamma * a1 / l + base) * (a2 - a1) + phi1
    D1 = nu * gamma * (a2 - a1) ** 2 / (2 * l)
    return -nu * gamma * np.asarray(x) / l + d2 * np.sin(-D1 + C1) + d1 * s1 + base


def explicit_P4_prime(array: JunctionArray, H: float, gamma: float, phi1: float, x):
    """Closed-form ``P_4'(x)`` for a three-junction device."""
    if array.n != 3:
        raise ValueError(f"explicit P4' needs exactly 3 junctions, got {array.n}")
    a1, a2, a3 = array.positions
    d1, d2, d3 = array.strengths
    l, nu = array.length, array.feed
    s1 = np.sin(phi1)
    base = H - (1 - nu) * gamma / 2
    C1 = (d1 * s1 - nu * gamma * a1 / l + base) * (a2 - a1) + phi1
    D1 = nu * gamma * (a2 - a1) ** 2 / (2 * l)
    D2 = nu * gamma * (a3 - a2) ** 2 / (2 * l)
    inner = -d2 * np.sin(D1 - C1) - nu * gamma * a2 / l + d1 * s1 + base
    phi3 = -D2 + inner * (a3 - a2) - D1 + C1
    return (
        -nu * gamma * np.asarray(x) / l
        + d3 * np.sin(phi3)
        + d2 * np.sin(-D1 + C1)
        + d1 * s1
        + base
    )
