"""Regenerate tests/oracle/frozen.json.  Run from the repository root:

    python3 tests/oracle/generate.py
"""

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from reference import brute_gamma_max, closed_form_phases, residual_ode

OUT = Path(__file__).with_name("frozen.json")


def main():
    out = {}

    # normalization of a measured layout (lengths in micrometres, lambda_J = 5.6)
    lam = Fraction(56, 10)
    out["normalized_spacings"] = [float(Fraction(s) / lam) for s in (20, 42, 12, 6)]

    # reduced feed for a centered unit
    out["mu"] = {"lb6_l8": 1 * 6 / 8, "lb8_l64": 1 * 8 / 64}

    # symmetric SQUID at zero field and full current
    d = 0.7
    phis = closed_form_phases([4.0, 5.5], [d, d], 10.0, 0.0, 0.0, 2 * d, math.pi / 2)
    out["symmetric_squid_phases"] = [float(p) for p in phis]

    # boundary residual by ODE integration on seeded random draws
    rng = np.random.default_rng(20240611)
    draws = []
    for _ in range(25):
        n = int(rng.integers(1, 5))
        l = float(rng.uniform(4, 12))
        a = np.sort(rng.uniform(0.1, l - 0.1, n))
        if n > 1 and np.min(np.diff(a)) < 1e-3:
            continue
        dd = rng.uniform(0.05, 1.5, n)
        nu, H, g, p = float(rng.uniform(0, 1)), *map(float, rng.uniform(-3, 3, 3))
        draws.append(
            {"a": a.tolist(), "d": dd.tolist(), "l": l, "nu": nu, "H": H, "gamma": g, "phi1": p,
             "R": float(residual_ode(a, dd, l, nu, H, g, p))}
        )
    out["residual_draws"] = draws

    # gamma_max by brute force scan
    cases = {
        "three_overlap": dict(a=[1.0, 2.0, 3.0], d=[1.0] * 3, l=10.0, nu=1.0, H=[0.0, 0.5, 1.0, 2.0, 3.0, 4.5]),
        "four_offcenter": dict(a=[0.1, 1.6, 4.1, 6.1], d=[1.0] * 4, l=10.0, nu=1.0, H=[0.0, 0.7, 2.0]),
        "squid_mixed": dict(a=[3.0, 4.5], d=[0.3, 0.2], l=9.0, nu=0.4, H=[-0.5, 0.0, 1.0, 2.5]),
    }
    gm = {}
    for name, c in cases.items():
        vals = [brute_gamma_max(c["a"], c["d"], c["l"], c["nu"], h) for h in c["H"]]
        gm[name] = {**c, "gamma_max": vals}
        print(name, vals)
    out["gamma_max"] = gm

    OUT.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
