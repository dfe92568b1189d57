# How the current feed and the position of the junctions in the cavity
# change the curve.
import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from pathlib import Path

from jjarray import JunctionArray, sweep_implicit
from jjarray.analysis import magnetic_shift, sup_gap
from jjarray.model import centered

OUT = Path(__file__).with_name("figures")
OUT.mkdir(exist_ok=True)
H = np.linspace(0, 2 * np.pi, 150)

# Centered unit 1-4-3: the overlap curve approaches the inline one as the cavity grows
fig, axes = plt.subplots(3, 1, figsize=(6, 8), sharex=True)
for ax, l in zip(axes, (8.0, 16.0, 64.0)):
    arr = JunctionArray.from_spacings((l - 8) / 2, (1.0, 4.0, 3.0), 1.0, l, 1.0)
    ov, inl = sweep_implicit(arr, H), sweep_implicit(arr.with_feed(0.0), H)
    print(f"l={l:>4}: sup |overlap - inline| = {sup_gap(ov, inl):.3f}")
    ax.plot(H, inl.gamma, "k-", label="inline")
    ax.plot(H, ov.gamma, "r--", label="overlap")
    ax.set_title(f"l = {l:g}")
axes[0].legend()
axes[-1].set_xlabel("H")
fig.savefig(OUT / "feed_convergence.png", dpi=120)

# Moving the unit off center under overlap feed shifts the curve by an
# amount proportional to the current
off = JunctionArray.from_spacings(0.1, (1.5, 2.5, 2.0), 1.0, 10.0, 1.0)
cen = centered(off)
print("H_nu / gamma =", magnetic_shift(off, 1.0))
Hs = np.linspace(0, 4 * np.pi, 300)
c_off, c_cen = sweep_implicit(off, Hs), sweep_implicit(cen, Hs)
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(c_cen.H, c_cen.gamma, "k-", label="centered")
ax.plot(c_off.H, c_off.gamma, "r-", alpha=0.6, label="off-centered")
ax.plot(c_off.H - magnetic_shift(off, c_off.gamma), c_off.gamma, "b:", label="off-centered, shifted back")
ax.set_xlabel("H")
ax.legend()
fig.savefig(OUT / "magnetic_shift.png", dpi=120)
