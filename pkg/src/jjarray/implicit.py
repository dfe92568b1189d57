"""Global ``gamma_max`` from the implicit curve ``R(phi_1, gamma) = 0``.

``R`` is the right-boundary residual of the piecewise solution.  The
rectangle ``[-pi, pi) x [0, sum(d)]`` is sampled on a grid and the top of
the curve is refined around the highest column roots.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .model import GammaCurve, JunctionArray, wrap_phase
from .piecewise import boundary_residual


@dataclass(frozen=True)
class GridSpec:
    phi1_samples: int = 400
    gamma_samples: int = 400
    refine_gamma_tol: float = 1e-8
    refine_phi1_tol: float = 1e-10
    candidates: int = 8  # column peaks refined per field

    def __post_init__(self):
        if self.phi1_samples < 8 or self.gamma_samples < 8:
            raise ValueError("grids need at least 8 samples per axis")
        if not (self.refine_gamma_tol > 0 and self.refine_phi1_tol > 0):
            raise ValueError("refinement tolerances must be positive")
        if self.candidates < 1:
            raise ValueError("candidates must be at least 1")


@dataclass(frozen=True)
class ImplicitResult:
    gamma_max: float
    phi1_at_max: float
    empty: bool = False


NO_ROOT = -1.0  # column value when R(phi_1, .) has no root in [0, sum(d)]


def _sign_change_top(sgn: np.ndarray) -> np.ndarray:
    """Index of the highest cell with a sign change in each column, or -1."""
    change = (sgn[:-1] != sgn[1:]) | (sgn[:-1] == 0)
    rows = np.arange(change.shape[0])[:, None]
    return np.where(change, rows, -1).max(axis=0)


def _bisect_columns(array, H, phi, lo, hi, iters=60):
    """Vectorized bisection of ``R(phi_j, .)`` on ``[lo_j, hi_j]``."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    s_lo = np.sign(boundary_residual(array, H, lo, phi))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        move_lo = np.sign(boundary_residual(array, H, mid, phi)) == s_lo
        lo = np.where(move_lo, mid, lo)
        hi = np.where(move_lo, hi, mid)
        if np.all(hi - lo < 1e-15):
            break
    return 0.5 * (lo + hi)


class _ColumnTop:
    """``T(phi_1)``: the highest root of ``R(phi_1, .)`` in ``[0, sum(d)]``."""

    def __init__(self, array, H, gam, xtol):
        self.array, self.H, self.gam, self.xtol = array, H, gam, xtol

    def __call__(self, phi: float) -> float:
        r = boundary_residual(self.array, self.H, self.gam, phi)
        if r[-1] == 0:
            return float(self.gam[-1])
        k = int(_sign_change_top(np.sign(r)[:, None])[0])
        if k < 0:
            return NO_ROOT
        if r[k] == 0:
            return float(self.gam[k])
        return brentq(
            lambda g: boundary_residual(self.array, self.H, g, phi),
            self.gam[k],
            self.gam[k + 1],
            xtol=self.xtol,
            rtol=4 * np.finfo(float).eps,
        )


def _column_peaks(values: np.ndarray, count: int) -> np.ndarray:
    """Indices of the largest local maxima of a periodic sequence (plateaus included)."""
    left, right = np.roll(values, 1), np.roll(values, -1)
    peaks = np.nonzero((values >= left) & (values >= right) & (values > NO_ROOT))[0]
    if len(peaks) == 0:
        peaks = np.array([int(np.argmax(values))])
    order = np.argsort(-values[peaks], kind="stable")
    return peaks[order[:count]]


def gamma_max_implicit(array: JunctionArray, H: float, grid: GridSpec = GridSpec()) -> ImplicitResult:
    """Largest current on the implicit curve at field ``H``.

    Every grid column gets its highest root by bisection; the strongest
    local maxima of that profile are then refined by a bounded scalar
    maximization of the column top over the neighbouring grid cells.
    The returned ``phi1_at_max`` reconstructs the maximal solution through
    :func:`jjarray.piecewise.build_solution`.  If the curve is not seen
    anywhere on the grid, ``gamma_max = 0`` is returned with ``empty=True``.
    """
    S = array.total_strength
    phi = np.linspace(-np.pi, np.pi, grid.phi1_samples, endpoint=False)
    gam = np.linspace(0.0, S, grid.gamma_samples)
    R = boundary_residual(array, H, gam[:, None], phi[None, :])

    on_top = np.nonzero(R[-1] == 0)[0]
    if len(on_top):
        return ImplicitResult(S, float(phi[on_top[0]]))
    top = _sign_change_top(np.sign(R))
    has = top >= 0
    if not has.any():
        return ImplicitResult(0.0, 0.0, empty=True)

    col = np.full(len(phi), NO_ROOT)
    exact = has & (R[np.maximum(top, 0), np.arange(len(phi))] == 0)
    col[exact] = gam[top[exact]]
    idx = has & ~exact
    col[idx] = _bisect_columns(array, H, phi[idx], gam[top[idx]], gam[top[idx] + 1])

    T = _ColumnTop(array, H, gam, grid.refine_gamma_tol)
    dphi = phi[1] - phi[0]
    best = (-np.inf, 0.0)
    for j in _column_peaks(col, grid.candidates):
        res = minimize_scalar(
            lambda p: -T(p),
            bounds=(phi[j] - dphi, phi[j] + dphi),
            method="bounded",
            options={"xatol": grid.refine_phi1_tol},
        )
        best = max(best, (-res.fun, res.x), (T(phi[j]), phi[j]))
    return ImplicitResult(float(best[0]), float(wrap_phase(best[1])))


def sweep_implicit(
    array: JunctionArray, H_list, grid: GridSpec = GridSpec(), workers: int | None = 1
) -> GammaCurve:
    """Independent :func:`gamma_max_implicit` at every field.

    ``workers > 1`` evaluates fields in a process pool; ``None`` uses all CPUs.
    Output order follows increasing ``H`` regardless of completion order.
    """
    H = np.unique(np.asarray(H_list, dtype=float))
    if len(H) == 0:
        raise ValueError("empty field list")
    if workers is None:
        workers = os.cpu_count() or 1
    fn = partial(gamma_max_implicit, array, grid=grid)
    if workers > 1 and len(H) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, H))
    else:
        results = [fn(h) for h in H]
    return GammaCurve.from_arrays(
        H,
        [r.gamma_max for r in results],
        [r.phi1_at_max for r in results],
        "implicit",
        array.fingerprint(),
        flags=["empty" if r.empty else "" for r in results],
    )


def existence_bracket(array: JunctionArray, H: float, phi1: float, tol: float = 1e-10) -> float:
    """A current ``gamma`` in ``[-sum(d), sum(d)]`` making ``(phi1, gamma)`` a solution.

    ``R`` is non-negative at the lower end and non-positive at the upper end,
    so a root always exists.  Brent's method does the work; plain bisection
    takes over if its answer does not meet ``tol`` on the residual.
    """
    S = array.total_strength
    f = lambda g: boundary_residual(array, H, g, phi1)
    lo, hi = -S, S
    r_lo, r_hi = f(lo), f(hi)
    if r_lo < 0 or r_hi > 0:
        raise ArithmeticError(f"no sign change: R(-S)={r_lo}, R(S)={r_hi}")
    if r_lo == 0:
        return -S
    if r_hi == 0:
        return S
    g = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    r = f(g)
    while abs(r) > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        g = mid
        r = f(g)
    return float(g)
