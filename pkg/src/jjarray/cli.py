"""``jjarray`` command line: sweeps, structural analysis, SQUID estimates, scale fits.

Exit codes: 0 success, 2 config error, 3 I/O error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .experiment import ExperimentFormatError, UnidentifiableError, fit_scales, load_experiment, model_function
from .implicit import GridSpec, sweep_implicit
from .magnetic import sweep_magnetic
from .model import GammaCurve, InvalidDeviceError, JunctionArray, PhysicalDevice, normalize
from .newton import CurveError, NewtonOptions, gamma_max_newton

log = logging.getLogger("jjarray")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4
METHODS = ("newton-up", "newton-down", "implicit", "magnetic")
CSV_COLUMNS = ("H", "gamma_max", "phi1_at_max", "method", "flags")


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------- config


def _device(spec: dict) -> JunctionArray:
    if not isinstance(spec, dict):
        raise ConfigError("'device' must be an object")
    spec = dict(spec)
    try:
        if spec.pop("normalize", False):
            return normalize(PhysicalDevice(**spec))
        if "spacings" in spec:
            return JunctionArray.from_spacings(**spec)
        return JunctionArray(**spec)
    except TypeError as e:
        raise ConfigError(f"bad device fields: {e}") from None
    except ValueError as e:
        raise ConfigError(f"invalid device: {e}") from None


def _fields(spec) -> np.ndarray:
    if isinstance(spec, list):
        spec = {"values": spec}
    if not isinstance(spec, dict):
        raise ConfigError("'H' must be a list or an object")
    if "values" in spec:
        vals = np.asarray(spec["values"], dtype=float)
        if vals.ndim != 1 or len(vals) == 0:
            raise ConfigError("'H.values' must be a non-empty list")
        return vals
    try:
        start, stop, steps = float(spec["start"]), float(spec["stop"]), spec["steps"]
    except KeyError as e:
        raise ConfigError(f"'H' range is missing {e}") from None
    if not isinstance(steps, int) or steps < 2:
        raise ConfigError(f"'H.steps' must be an integer >= 2, got {steps!r}")
    return np.linspace(start, stop, steps)


def _options(cls, overrides: dict | None):
    overrides = overrides or {}
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    try:
        return cls(**overrides)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{cls.__name__}: {e}") from None


def resolve_config(raw: dict, need_fields: bool = True) -> dict:
    """Validate ``raw`` and fill every default so the result is self-describing."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "device" not in raw:
        raise ConfigError("config needs a 'device'")
    array = _device(raw["device"])
    method = raw.get("method", "implicit")
    if method != "all" and method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS + ('all',)}")
    newton = _options(NewtonOptions, raw.get("newton"))
    grid = _options(GridSpec, raw.get("grid"))
    out = dict(raw.get("output") or {})
    out.setdefault("path", None)
    out.setdefault("format", "csv")
    if out["format"] not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {out['format']!r}")
    H = _fields(raw["H"]) if need_fields or "H" in raw else None
    fit = dict(raw.get("fit") or {})
    fit.setdefault("model", "magnetic")
    fit.setdefault("alpha_bounds", None)
    if fit["model"] not in ("magnetic", "implicit"):
        raise ConfigError(f"fit model must be magnetic or implicit, got {fit['model']!r}")
    return {
        "array": array,
        "H": H,
        "method": method,
        "newton": newton,
        "grid": grid,
        "output": out,
        "fit": fit,
    }


def echo_config(cfg: dict) -> dict:
    """JSON-ready form of a resolved config."""
    a = cfg["array"]
    d = {
        "device": {
            "positions": list(a.positions),
            "strengths": list(a.strengths),
            "length": a.length,
            "feed": a.feed,
            "fingerprint": a.fingerprint(),
        },
        "method": cfg["method"],
        "newton": dataclasses.asdict(cfg["newton"].resolved(a)),
        "grid": dataclasses.asdict(cfg["grid"]),
        "output": {"format": cfg["output"]["format"]},  # the destination does not affect results
        "fit": cfg["fit"],
    }
    if cfg["H"] is not None:
        d["H"] = [float(h) for h in cfg["H"]]
    return d


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot read config {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None


def worker_count() -> int:
    cap = os.environ.get("JJARRAY_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"JJARRAY_THREADS must be an integer, got {cap!r}") from None
    return n


# ---------------------------------------------------------------- sweep


def run_sweep(cfg: dict, workers: int = 1) -> list[GammaCurve]:
    array, H = cfg["array"], cfg["H"]
    methods = METHODS if cfg["method"] == "all" else (cfg["method"],)
    curves = []
    for m in methods:
        if m.startswith("newton"):
            curves.append(gamma_max_newton(array, H, m.split("-")[1], cfg["newton"]))
        elif m == "implicit":
            curves.append(sweep_implicit(array, H, cfg["grid"], workers=workers))
        else:
            curves.append(sweep_magnetic(array, H))
    return curves


def curves_to_csv(curves: list[GammaCurve], resolved: dict) -> str:
    buf = io.StringIO()
    buf.write("# resolved_config: " + json.dumps(resolved, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in curves:
        for p in c.points:
            w.writerow((fmt(p.H), fmt(p.gamma_max), fmt(p.phi1_at_max), c.method, p.flags))
    return buf.getvalue()


def curves_to_json(curves: list[GammaCurve], resolved: dict) -> str:
    doc = {
        "resolved_config": resolved,
        "curves": [
            {
                "method": c.method,
                "fingerprint": c.fingerprint,
                "H": [float(fmt(h)) for h in c.H],
                "gamma_max": [float(fmt(g)) for g in c.gamma],
                "phi1_at_max": [float(fmt(p)) for p in c.phi1],
                "flags": c.flags,
            }
            for c in curves
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_curve_csv(path) -> dict[str, GammaCurve]:
    """Curves from a sweep CSV, keyed by method."""
    rows: dict[str, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or list(reader.fieldnames) != list(CSV_COLUMNS):
        raise ConfigError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
    for r in reader:
        try:
            rows.setdefault(r["method"], []).append(
                (float(r["H"]), float(r["gamma_max"]), float(r["phi1_at_max"]), r["flags"] or "")
            )
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: malformed row {r}") from None
    out = {}
    for m, pts in rows.items():
        pts.sort()
        H, g, p, f = zip(*pts)
        out[m] = GammaCurve.from_arrays(H, g, p, m, flags=list(f))
    return out


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_sweep(args) -> int:
    cfg = resolve_config(load_config(args.config))
    if args.out:
        cfg["output"]["path"] = args.out
    try:
        curves = run_sweep(cfg, workers=worker_count())
    except CurveError as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    resolved = echo_config(cfg)
    to_text = curves_to_csv if cfg["output"]["format"] == "csv" else curves_to_json
    _write(to_text(curves, resolved), cfg["output"]["path"])
    return EXIT_OK


# ---------------------------------------------------------------- analyze


def _guard(fn):
    try:
        return fn()
    except (analysis.NotApplicableError, analysis.RegularityAssumptionError) as e:
        return {"not_applicable": str(e)}


def analyze_report(array: JunctionArray) -> dict:
    def per():
        p = analysis.period(array)
        return {"value": p.value, "over_pi": p.value / math.pi, "exact": p.exact,
                "spacings": [[r.p, r.q] for r in p.spacings]}

    def shift():
        return {"coefficient": analysis.magnetic_shift_coefficient(array),
                "unit_length": float(array.a[-1] - array.a[0]) if array.n else 0.0}

    def squid():
        if array.n != 2:
            raise analysis.NotApplicableError("needs exactly two junctions")
        d1, d2 = array.strengths
        l1 = float(array.spacings[0])
        lo, hi = analysis.regularity_bounds(d1, l1)
        return {"lower": lo, "upper": hi, "class": analysis.regularity_class(d1, d2, l1)}

    def extrema():
        e = analysis.squid_extrema_for(array)
        return dataclasses.asdict(e)

    return {
        "fingerprint": array.fingerprint(),
        "period": _guard(per),
        "magnetic_shift": _guard(shift) if array.n >= 1 else {"not_applicable": "empty"},
        "regularity": _guard(squid),
        "extrema": _guard(extrema),
        "bump_count": _guard(lambda: analysis.bump_count(array)),
    }


def cmd_analyze(args) -> int:
    cfg = resolve_config(load_config(args.config), need_fields=False)
    print(json.dumps(analyze_report(cfg["array"]), indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------- estimate


def cmd_estimate(args) -> int:
    curves = read_curve_csv(args.curve)
    if not curves:
        raise ConfigError(f"{args.curve}: no curve rows")
    if args.method:
        if args.method not in curves:
            raise ConfigError(f"method {args.method!r} not in {sorted(curves)}")
        method = args.method
    else:
        method = "implicit" if "implicit" in curves else sorted(curves)[0]
    try:
        est = analysis.estimate_squid(curves[method], args.tol)
    except analysis.MalformedCurveError as e:
        raise ConfigError(str(e)) from None
    doc = dataclasses.asdict(est)
    doc["method"] = method
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------- fit


def cmd_fit(args) -> int:
    cfg = resolve_config(load_config(args.config), need_fields=False)
    try:
        data = load_experiment(args.data)
    except ExperimentFormatError as e:
        raise ConfigError(f"{args.data}: {e}") from None
    fit_cfg = cfg["fit"]
    try:
        res = fit_scales(
            data, cfg["array"], fit_cfg["model"],
            alpha_bounds=tuple(fit_cfg["alpha_bounds"]) if fit_cfg["alpha_bounds"] else None,
            grid=cfg["grid"],
        )
    except UnidentifiableError as e:
        raise ConfigError(str(e)) from None
    fn = model_function(cfg["array"], res.model, H_extent=res.alpha * float(np.max(np.abs(data.field))),
                        grid=cfg["grid"])
    f_plot = np.linspace(data.field.min(), data.field.max(), 400)
    doc = {
        "resolved_config": echo_config(cfg),
        "alpha": res.alpha,
        "beta": res.beta,
        "rms": res.rms,
        "model": res.model,
        "residuals": res.residuals.tolist(),
        "model_curve": {"field": f_plot.tolist(), "current": res.predict(fn, f_plot).tolist()},
    }
    _write(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jjarray", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="compute gamma_max(H) curves")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output file (overrides output.path; '-' for stdout)")
    s.set_defaults(func=cmd_sweep)

    a = sub.add_parser("analyze", help="period, shift, regularity, extrema, bump count")
    a.add_argument("--config", required=True)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("estimate", help="SQUID strengths from a sweep CSV")
    e.add_argument("--curve", required=True)
    e.add_argument("--method", help="which curve in the file to use")
    e.add_argument("--tol", type=float, default=None, help="spiked/smooth threshold on the minimum")
    e.set_defaults(func=cmd_estimate)

    f = sub.add_parser("fit", help="fit field and current scales to measured data")
    f.add_argument("--data", required=True)
    f.add_argument("--config", required=True)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidDeviceError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
