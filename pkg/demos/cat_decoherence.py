"""How fast a lossy cat state forgets its parity.

Sends the even and odd cats of amplitude 3 through a beam splitter and
tracks the Bures distance between them. Losing on average one photon
already brings the distance below 0.1, and every cat amplitude falls on
the same curve once plotted against the mean number of lost photons.
"""

import math

import numpy as np

from mqsdeco import CatParams, LossSetting, apply_loss_single_mode, bures_distance, cat_state
from mqsdeco import experiments as ex
from mqsdeco.metrics import cat_visibility_closed_form, universal_visibility

alpha, phi = 3.0, math.pi / 2

# Direct route: build both cats, lose photons, compare.
loss = LossSetting.from_reflectivity(1 / alpha**2)
even = apply_loss_single_mode(cat_state(CatParams(alpha, phi, +1)), loss)
odd = apply_loss_single_mode(cat_state(CatParams(alpha, phi, -1)), loss)
print(f"one lost photon on average: D = {bures_distance(even, odd):.4f}")

print("\n   R      x   numeric   closed form")
for R in (0.0, 0.02, 0.05, 0.1, 0.2, 0.5):
    _, d = ex.cat_pair_visibility(alpha, phi, R)
    print(f"{R:5.2f} {R * alpha**2:6.2f}  {d:.6f}   {cat_visibility_closed_form(alpha, phi, R):.6f}")

# A larger cat at a quarter turn has the same lost-photon scale and the same curve.
x = np.linspace(0.0, 3.0, 7)
other = [ex.cat_pair_visibility(4.2426, math.pi / 4, xi / 9.0)[1] for xi in x]
print("\nuniversal curve, alpha=4.24 at phi=pi/4:")
for xi, d in zip(x, other):
    print(f"  x={xi:.1f}  D={d:.6f}  D(x)={universal_visibility(xi):.6f}")

rows = ex.run_cat_distributions(alpha, [0.0, 0.5])
for label in ("R=0.0", "R=0.5"):
    p = np.array([r["probability"] for r in rows if r["label"] == label])
    print(f"{label}: P(odd) = {p[1::2].sum():.3e}, <n> = {(np.arange(p.size) * p).sum():.3f}")
