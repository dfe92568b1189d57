# Two junctions: how the critical current depends on field, and what the
# curve says about the junctions.
import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from pathlib import Path

from jjarray import JunctionArray, sweep_implicit, sweep_magnetic
from jjarray.analysis import estimate_squid, regularity_bounds, regularity_class, squid_extrema_for

OUT = Path(__file__).with_name("figures")
OUT.mkdir(exist_ok=True)

# A single junction does not care about the field at all
one = JunctionArray((5.0,), (0.8,), 10.0, 0.5)
print("single junction:", sweep_implicit(one, [0.0, 1.0, 2.0]).gamma)

# Two equal junctions 2.32 apart, weak coupling. d2 inside the interval
# below gives a curve with kinks; outside it the curve is smooth.
d1, l1 = 0.0357, 2.32
lo, hi = regularity_bounds(d1, l1)
print(f"kinks for d2 in [{lo:.6f}, {hi:.6f}]")

H = np.linspace(0, 2 * 2 * np.pi / l1, 300)
fig, ax = plt.subplots(figsize=(7, 4))
for d2, style in ((d1, "-"), (1.5 * hi, "--")):
    arr = JunctionArray((5 - l1 / 2, 5 + l1 / 2), (d1, d2), 10.0, 0.0)
    c = sweep_implicit(arr, H)
    ax.plot(c.H, c.gamma, style, label=f"d2 = {d2:.4f}")
    est = estimate_squid(c)
    e = squid_extrema_for(arr)
    print(f"d2={d2:.4f} ({regularity_class(d1, d2, l1)}): recovered strengths {np.round(est.strengths, 4)}, "
          f"max predicted at H={e.H_at_max:.4f}, observed at H={c.H[np.argmax(c.gamma)] % (2 * np.pi / l1):.4f} (mod period)")

# the magnetic approximation is already very close at this coupling
m = sweep_magnetic(JunctionArray((5 - l1 / 2, 5 + l1 / 2), (d1, d1), 10.0), H)
ax.plot(m.H, m.gamma, ":", color="k", label="magnetic approx.")
ax.set_xlabel("H")
ax.set_ylabel("gamma_max")
ax.legend()
fig.savefig(OUT / "squid_pattern.png", dpi=120)
