"""Post-selecting on photon-number imbalance.

Keeping only events whose two polarization counts differ by more than k
makes the lossy macrostates easier to tell apart, at the price of a
lower success rate.
"""

from mqsdeco import experiments as ex

rows = ex.run_ofilter_visibility(0.8, [0, 2, 4], [0.2, 0.5, 0.8])
print(" k    R      D      success")
for r in rows:
    print(f"{r['k']:2d}  {r['R']:.1f}  {r['D']:.4f}  {r['success_prob']:.4f}")
