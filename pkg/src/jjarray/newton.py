"""Newton continuation on the n-junction transcendental system.

The unknowns are ``psi_i = phi_i + f(a_i)`` with ``f(x) = nu gamma x**2 / (2 l)``,
which removes the constant source term so that ``psi`` is piecewise linear.
The Jacobian is symmetric tridiagonal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from .magnetic import c_max
from .model import GammaCurve, JunctionArray, PhaseSolution, wrap_phase
from .piecewise import build_solution

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-12


class NonConvergence(RuntimeError):
    """Newton did not reach the residual tolerance.

    During continuation this is expected past a fold and is used to detect
    ``gamma_max``; it is not a hard failure.
    """

    def __init__(self, msg, iterations=0, residual=np.inf, singular=False):
        super().__init__(msg)
        self.iterations = iterations
        self.residual = residual
        self.singular = singular


class CurveError(RuntimeError):
    """No solution at all could be found at the first field of a sweep."""


@dataclass(frozen=True)
class NewtonOptions:
    residual_tol: float = 1e-10
    max_iters: int = 50
    damping: float = 0.5
    max_halvings: int = 20
    gamma_step_initial: float | None = None  # default 1e-3 * sum(d)
    gamma_bisect_tol: float | None = None  # default 1e-6 * sum(d)
    H_step: float | None = None  # max field step between solves; None = use the given fields

    def __post_init__(self):
        if not 0 < self.damping < 1:
            raise ValueError("damping must be in (0, 1)")
        for name in ("residual_tol", "max_iters", "max_halvings"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("gamma_step_initial", "gamma_bisect_tol", "H_step"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")

    def resolved(self, array: JunctionArray) -> "NewtonOptions":
        s = array.total_strength
        return replace(
            self,
            gamma_step_initial=self.gamma_step_initial or 1e-3 * s,
            gamma_bisect_tol=self.gamma_bisect_tol or 1e-6 * s,
        )


@dataclass(frozen=True)
class PsiState:
    psi: np.ndarray
    H: float
    gamma: float
    iterations: int = 0

    def phases(self, array: JunctionArray) -> np.ndarray:
        """Junction phases ``phi_i = psi_i - f(a_i)``."""
        return self.psi - source_shift(array, self.gamma)

    def to_solution(self, array: JunctionArray) -> PhaseSolution:
        return build_solution(array, self.H, self.gamma, self.phases(array)[0])


def source_shift(array: JunctionArray, gamma: float) -> np.ndarray:
    """``f(a_i) = nu gamma a_i**2 / (2 l)``."""
    return (array.feed * gamma / (2 * array.length)) * array.a**2


def residual_system(array: JunctionArray, H: float, gamma: float, psi) -> np.ndarray:
    """Slope balance at every junction in the ``psi`` variables.

    Row ``i`` is ``psi'(a_i^-) - psi'(a_i^+) + d_i sin(psi_i - f_i)`` with the
    outer slopes taken from the boundary conditions
    ``psi'(0) = H - (1 - nu) gamma / 2`` and ``psi'(l) = H + (1 + nu) gamma / 2``.
    """
    psi = np.asarray(psi, dtype=float)
    nu = array.feed
    r = array.d * np.sin(psi - source_shift(array, gamma))
    grad = (psi[1:] - psi[:-1]) / array.spacings
    r[1:] += grad
    r[:-1] -= grad
    r[0] += H - (1 - nu) * gamma / 2
    r[-1] -= H + (1 + nu) * gamma / 2
    return r


def jacobian_bands(array: JunctionArray, H: float, gamma: float, psi):
    """Diagonal and off-diagonal of the (symmetric tridiagonal) Jacobian."""
    psi = np.asarray(psi, dtype=float)
    inv = 1.0 / array.spacings
    diag = array.d * np.cos(psi - source_shift(array, gamma))
    diag[:-1] += inv
    diag[1:] += inv
    return diag, -inv


def jacobian(array: JunctionArray, H: float, gamma: float, psi) -> np.ndarray:
    """Dense ``n x n`` Jacobian of :func:`residual_system` with respect to ``psi``."""
    diag, off = jacobian_bands(array, H, gamma, psi)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def _is_singular(diag, off, ref: float = 0.0) -> bool:
    """LU pivots of the tridiagonal matrix, without row exchanges.

    Zero pivots flag a singular matrix; tiny ones relative to the largest
    entry (or ``ref``, the largest junction strength) count as singular too.
    """
    scale = max(np.max(np.abs(diag)), np.max(np.abs(off), initial=0.0), ref)
    if scale == 0:
        return True
    # det via continuant recurrence, normalised to avoid overflow
    p_prev, p = 1.0, diag[0]
    smallest = abs(p)
    for k in range(1, len(diag)):
        if p == 0:
            return True
        p_prev, p = p, diag[k] - off[k - 1] ** 2 * p_prev / p
        smallest = min(smallest, abs(p))
    return smallest < PIVOT_TOL * scale


def _newton_step(diag, off, F):
    n = len(diag)
    if n == 1:
        return F / diag
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, F)


def solve_newton(
    array: JunctionArray,
    H: float,
    gamma: float,
    psi0,
    opts: NewtonOptions = NewtonOptions(),
) -> PsiState:
    """Damped Newton iteration for the junction system at fixed ``(H, gamma)``.

    Each step is backtracked (factor ``opts.damping``) until the max-norm of the
    residual decreases.  Raises :class:`NonConvergence` when the iteration
    budget or the backtracking budget runs out, or on a singular Jacobian.
    """
    psi = np.array(psi0, dtype=float)
    dmax = float(array.d.max())
    F = residual_system(array, H, gamma, psi)
    norm = np.abs(F).max()
    for it in range(opts.max_iters + 1):
        if norm <= opts.residual_tol:
            return PsiState(psi, float(H), float(gamma), it)
        if it == opts.max_iters:
            break
        diag, off = jacobian_bands(array, H, gamma, psi)
        if _is_singular(diag, off, dmax):
            raise NonConvergence("singular Jacobian", it, norm, singular=True)
        try:
            step = _newton_step(diag, off, F)
        except np.linalg.LinAlgError:
            raise NonConvergence("singular Jacobian", it, norm, singular=True) from None
        if not np.all(np.isfinite(step)):
            raise NonConvergence("non-finite Newton step", it, norm, singular=True)
        t = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = psi - t * step
            Ft = residual_system(array, H, gamma, trial)
            nt = np.abs(Ft).max()
            if nt < norm:
                break
            t *= opts.damping
        else:
            raise NonConvergence("line search exhausted", it, norm)
        psi, F, norm = trial, Ft, nt
    raise NonConvergence(f"no convergence in {opts.max_iters} iterations", opts.max_iters, norm)


def magnetic_guess(array: JunctionArray, H: float, gamma: float, offset: float = 0.0) -> np.ndarray:
    """Initial ``psi`` from the linear phase ``H a_i + c_max(H) + offset``.

    ``offset = -pi/2`` gives the zero-current linear phase on the stable side.
    """
    c, _ = c_max(array, H)
    return H * array.a + c + offset + source_shift(array, gamma)


def _try(array, H, gamma, psi, opts):
    try:
        return solve_newton(array, H, gamma, psi, opts)
    except NonConvergence:
        return None


def climb(array: JunctionArray, state: PsiState, opts: NewtonOptions) -> PsiState:
    """Raise ``gamma`` from a solved state until Newton stops converging.

    The step grows geometrically while solves succeed; the last
    solvable/unsolvable bracket is then bisected to ``gamma_bisect_tol``.
    Every solve is warm-started from the last success.
    """
    top = array.total_strength
    step = opts.gamma_step_initial
    best = state
    hi = None
    while hi is None:
        g = best.gamma + step
        if g > top:
            g = top
            if best.gamma >= top:
                return best
        nxt = _try(array, best.H, g, best.psi, opts)
        if nxt is None:
            hi = g
        else:
            best = nxt
            step *= 2
            if g >= top:
                return best
    while hi - best.gamma > opts.gamma_bisect_tol:
        g = 0.5 * (best.gamma + hi)
        nxt = _try(array, best.H, g, best.psi, opts)
        if nxt is None:
            hi = g
        else:
            best = nxt
    return best


def _descend(array, H, gamma, psi, opts) -> PsiState | None:
    """Find a solvable gamma at or below ``gamma`` warm-starting from ``psi``."""
    step = opts.gamma_step_initial
    g = gamma
    while True:
        s = _try(array, H, g, psi, opts)
        if s is not None:
            return s
        if g <= 0:
            return None
        g = max(0.0, g - step)
        step *= 2


def cold_start(array: JunctionArray, H: float, opts: NewtonOptions) -> PsiState:
    """A first solution at field ``H``, at zero current, from the magnetic-approximation phases."""
    for psi in (
        magnetic_guess(array, H, 0.0, -np.pi / 2),
        magnetic_guess(array, H, 0.0),
        np.zeros(array.n),
    ):
        s = _try(array, H, 0.0, psi, opts)
        if s is not None:
            return s
    raise CurveError(f"no static solution found at H = {H}, gamma = 0")


def _march(H_values: np.ndarray, H_step: float | None) -> tuple[np.ndarray, np.ndarray]:
    """Insert intermediate fields so consecutive steps are at most ``H_step``.

    Returns the marching fields and a mask of the requested ones.
    """
    if H_step is None or len(H_values) < 2:
        return H_values, np.ones(len(H_values), bool)
    pts, keep = [H_values[0]], [True]
    for h0, h1 in zip(H_values, H_values[1:]):
        m = max(1, int(np.ceil(abs(h1 - h0) / H_step - 1e-9)))
        for k in range(1, m + 1):
            pts.append(h0 + (h1 - h0) * k / m)
            keep.append(k == m)
    return np.array(pts), np.array(keep)


def gamma_max_newton(
    array: JunctionArray,
    H_range: Sequence[float],
    direction: str = "up",
    opts: NewtonOptions = NewtonOptions(),
) -> GammaCurve:
    """Trace ``gamma_max(H)`` by continuation in the given sweep direction.

    At every field the previous solution is reused as the initial guess; if
    it no longer converges the current is lowered until it does, then raised
    again until Newton fails.  The result is tagged ``newton-up`` or
    ``newton-down`` and may differ between directions (hysteresis).
    """
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    H_sorted = np.unique(np.asarray(H_range, dtype=float))
    if len(H_sorted) == 0:
        raise ValueError("empty field range")
    opts = opts.resolved(array)
    H_seq = H_sorted if direction == "up" else H_sorted[::-1]
    march, keep = _march(H_seq, opts.H_step)

    state = climb(array, cold_start(array, march[0], opts), opts)
    out = []
    for k, (h, kept) in enumerate(zip(march, keep)):
        flags = ""
        if k > 0:
            s = _descend(array, h, state.gamma, state.psi, opts)
            if s is None:
                log.info("continuation lost at H=%g; cold restart", h)
                s = cold_start(array, h, opts)
                flags = "restart"
            state = climb(array, s, opts)
        if kept:
            phi1 = float(wrap_phase(state.phases(array)[0]))
            out.append((h, state.gamma, phi1, flags))
    if direction == "down":
        out.reverse()
    H, g, p, f = zip(*out)
    return GammaCurve.from_arrays(H, g, p, f"newton-{direction}", array.fingerprint(), list(f))
