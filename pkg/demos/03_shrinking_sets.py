"""Shrinking families of closed sets absorbed by matrix powers.

For a non-compact map the tagged Jordan block supplies closed sets D_t,
increasing in t, whose intersection is Lebesgue null and such that high
powers of the map send D_t'' into D_t' for t' < t''.  The absorption lag
h0 is estimated by iterating sampled points.

Run:  python3 demos/03_shrinking_sets.py
"""

import numpy as np

from levymix import absorption_lag, build_family, contains, null_boundary_check
from levymix.gallery import shear, squeeze

for name, A in [("shear", shear()), ("squeeze", squeeze())]:
    fam = build_family(A)
    kind = "cone" if fam.uses_cone else "ball"
    print(f"{name}: case {fam.case}, {kind} family on block "
          f"{fam.block_index}")

    # membership at t = 1
    for x in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        print(f"  x={x} in D_1: {contains(fam, 1.0, x)}")

    # absorption lags across a grid of scales
    for t1, t2 in [(0.5, 1.0), (0.2, 5.0)]:
        h0, bad = absorption_lag(fam, t1, t2, n_samples=2_000, seed=0)
        print(f"  A^h D_{t2} inside D_{t1} for h >= {h0} "
              f"({bad} violations)")

    # the union of the family fills space, the intersection is null
    outside, inside = null_boundary_check(fam, n_samples=50_000, seed=1)
    print(f"  fraction outside the union {outside:.4f}, "
          f"inside the intersection {inside:.4f}")
    print()
