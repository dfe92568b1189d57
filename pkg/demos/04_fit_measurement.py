# Fitting lab-unit data: field and current scales for a known layout.
# The "measurement" here is synthetic; swap in a real two-column CSV.
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from jjarray import JunctionArray, PhysicalDevice, fit_scales, load_experiment, normalize
from jjarray.magnetic import gamma_max_magnetic_values

# five junctions, spacings 20, 42, 12, 6 micrometres, lambda_J = 5.6 micrometres
dev = PhysicalDevice(5.6, 5.0, (1.0,) * 5, tuple(np.cumsum([30.0, 20, 42, 12, 6])), 140.0, 0.0)
arr = normalize(dev)
print("normalized spacings:", np.round(arr.spacings, 3))

rng = np.random.default_rng(1)
field = np.linspace(-40, 40, 161)  # e.g. coil current in mA
alpha, beta = 0.05, 3.0
current = beta * gamma_max_magnetic_values(arr, alpha * field)
current = np.abs(current + 0.01 * current.max() * rng.standard_normal(len(field)))

tmp = Path(tempfile.mkdtemp())
csv_path = tmp / "measured.csv"
csv_path.write_text("field,current\n" + "".join(f"{f:.6g},{c:.6g}\n" for f, c in zip(field, current)))

res = fit_scales(load_experiment(csv_path), arr)
print(f"alpha = {res.alpha:.5f} (true {alpha}), beta = {res.beta:.4f} (true {beta}), rms = {res.rms:.4f}")

# same thing through the command line
cfg = tmp / "run.json"
cfg.write_text(json.dumps({"device": {"positions": list(arr.positions), "strengths": list(arr.strengths),
                                      "length": arr.length}}))
out = subprocess.run([sys.executable, "-m", "jjarray.cli", "fit", "--data", str(csv_path), "--config", str(cfg)],
                     capture_output=True, text=True, check=True)
doc = json.loads(out.stdout)
print("cli:", {k: round(doc[k], 5) for k in ("alpha", "beta", "rms")})
