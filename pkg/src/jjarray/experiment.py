"""Measured ``(field, current)`` data and linear scale fitting against model curves."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .analysis import period
from .implicit import GridSpec, sweep_implicit
from .magnetic import gamma_max_magnetic_values
from .model import JunctionArray


class ExperimentFormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


class UnidentifiableError(ValueError):
    """The data cannot determine the field scale."""


@dataclass(frozen=True)
class ExperimentData:
    field: np.ndarray
    current: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        f = np.asarray(self.field, dtype=float)
        c = np.asarray(self.current, dtype=float)
        if f.ndim != 1 or f.shape != c.shape:
            raise ExperimentFormatError("field and current must be 1-D of equal length")
        if len(f) == 0:
            raise ExperimentFormatError("no samples")
        if np.any(c < 0):
            raise ExperimentFormatError("currents must be non-negative")
        object.__setattr__(self, "field", f)
        object.__setattr__(self, "current", c)

    def __len__(self):
        return len(self.field)


def load_experiment(path, metadata: dict | None = None) -> ExperimentData:
    """Read a two-column CSV of ``field,current``; a single header row is allowed."""
    path = Path(path)
    fields, currents = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ExperimentFormatError(f"expected 2 columns, got {len(row)}", lineno)
            try:
                f, c = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1 and not fields:
                    continue  # header
                raise ExperimentFormatError(f"non-numeric value in {row!r}", lineno) from None
            if not (np.isfinite(f) and np.isfinite(c)):
                raise ExperimentFormatError("non-finite value", lineno)
            if c < 0:
                raise ExperimentFormatError(f"negative current {c}", lineno)
            fields.append(f)
            currents.append(c)
    if not fields:
        raise ExperimentFormatError(f"{path} contains no samples")
    return ExperimentData(np.array(fields), np.array(currents), dict(metadata or {}))


@dataclass(frozen=True)
class ScaleFit:
    """``current ~ beta * gamma_max(alpha * field)``."""

    alpha: float
    beta: float
    rms: float
    residuals: np.ndarray
    model: str = "magnetic"

    def predict(self, curve_fn: Callable, field_values) -> np.ndarray:
        return self.beta * curve_fn(self.alpha * np.asarray(field_values, dtype=float))


def best_beta(model_values: np.ndarray, current: np.ndarray) -> float:
    """Least-squares amplitude ``sum(g c) / sum(g g)`` for fixed field scale."""
    den = float(np.dot(model_values, model_values))
    return float(np.dot(model_values, current) / den) if den > 0 else 0.0


def model_function(
    array: JunctionArray,
    model: str = "magnetic",
    H_extent: float | None = None,
    grid: GridSpec = GridSpec(),
    table_samples: int = 400,
) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized ``H -> gamma_max(H)`` for the chosen backend.

    The implicit backend tabulates one period (or ``[-H_extent, H_extent]`` when
    the device has no exact period) and interpolates linearly.
    """
    if model == "magnetic":
        return lambda H: gamma_max_magnetic_values(array, H)
    if model != "implicit":
        raise ValueError(f"unknown model {model!r}")
    per = period(array) if array.n > 1 else None
    if per is None:
        s = array.total_strength
        return lambda H: np.full(np.shape(H), s)
    if per.exact:
        Hp = per.value
        H = np.linspace(0.0, Hp, table_samples + 1)[:-1]
        g = sweep_implicit(array, H, grid).gamma
        Hx, gx = np.append(H, Hp), np.append(g, g[0])
        return lambda h: np.interp(np.mod(h, Hp), Hx, gx)
    if H_extent is None:
        raise ValueError("non-periodic device: H_extent is required for the implicit backend")
    H = np.linspace(-H_extent, H_extent, table_samples)
    g = sweep_implicit(array, H, grid).gamma
    return lambda h: np.interp(h, H, g)


def _sse(curve_fn, alpha, field, current):
    g = curve_fn(alpha * field)
    b = best_beta(g, current)
    return float(np.sum((b * g - current) ** 2)), b


def fit_scales(
    data: ExperimentData,
    array: JunctionArray,
    model: str = "magnetic",
    alpha_bounds: tuple[float, float] | None = None,
    grid_points: int | None = None,
    rel_tol: float = 1e-6,
    grid: GridSpec = GridSpec(),
) -> ScaleFit:
    """Fit field scale ``alpha`` and current scale ``beta`` by least squares.

    ``beta`` is eliminated in closed form.  ``alpha`` is searched on a log
    grid fine enough to resolve the pattern at the largest scale, then
    refined by a bounded scalar minimization to ``rel_tol``.  Default
    bounds put between 0.02 and 20 field periods across the data.
    """
    f, c = data.field, data.current
    F = float(np.max(np.abs(f)))
    if np.ptp(f) == 0 or F == 0:
        raise UnidentifiableError("all fields are equal; alpha cannot be identified")
    if array.n < 2:
        raise UnidentifiableError("a single junction has a flat pattern; alpha cannot be identified")
    if alpha_bounds is None:
        Hp = period(array).value
        alpha_bounds = (0.02 * Hp / F, 20 * Hp / F)
    lo, hi = alpha_bounds
    if not 0 < lo < hi:
        raise ValueError(f"bad alpha bounds {alpha_bounds}")
    curve_fn = model_function(array, model, H_extent=hi * F, grid=grid)

    if grid_points is None:
        # about 1/50 of a period of phase error at the top of the range
        Hp = period(array).value
        rel_step = Hp / (50 * hi * F)
        grid_points = int(min(20000, max(200, np.log(hi / lo) / rel_step)))
    alphas = np.geomspace(lo, hi, grid_points)
    sse = np.empty(len(alphas))
    for i0 in range(0, len(alphas), 256):
        chunk = alphas[i0 : i0 + 256]
        g = curve_fn(np.multiply.outer(chunk, f))
        num = g @ c
        den = np.einsum("ij,ij->i", g, g)
        b = np.where(den > 0, num / np.where(den > 0, den, 1), 0.0)
        sse[i0 : i0 + 256] = np.sum((b[:, None] * g - c) ** 2, axis=1)
    k = int(np.argmin(sse))
    ll = np.log(alphas[max(k - 1, 0)])
    lh = np.log(alphas[min(k + 1, len(alphas) - 1)])
    res = minimize_scalar(
        lambda la: _sse(curve_fn, np.exp(la), f, c)[0],
        bounds=(ll, lh),
        method="bounded",
        options={"xatol": rel_tol},
    )
    alpha = float(np.exp(res.x)) if res.fun <= sse[k] else float(alphas[k])
    _, beta = _sse(curve_fn, alpha, f, c)
    resid = beta * curve_fn(alpha * f) - c
    return ScaleFit(alpha, beta, float(np.sqrt(np.mean(resid**2))), resid, model)
