"""Convolve two point masses and test the product formula on a few weights.

Run with an optional profile: ``python3 demos/product_formula.py 2 2 4``.
"""

import sys

import numpy as np

from bcjacobi.hypergroup import convolve, product_formula_check, support_excess
from bcjacobi.matrices import make_rng
from bcjacobi.roots import RankProfile, dominant_weights

q, d, mu = (int(sys.argv[1]), int(sys.argv[2]), float(sys.argv[3])) if len(sys.argv) > 3 else (2, 2, 4.0)
prof = RankProfile(q, d, mu)
rng = make_rng(7)
x = np.linspace(1.2, 0.3, q)
y = np.linspace(0.9, 0.5, q)

meas = convolve(x, y, prof, 100_000, rng)
print(f"{prof}: {len(meas)} atoms via {meas.metadata['method']}, ESS {meas.effective_sample_size():.0f}")
print(f"support excess {support_excess(meas, x, y):.3e} (nonpositive means inside the bound)")
for lam in dominant_weights(q, 4):
    if lam.l1 == 0 or lam.l1 > 4:
        continue
    rep = product_formula_check(lam, x, y, prof, 0, measure=meas)
    print(f"  lam={lam.entries}: R(x)R(y)={rep.lhs:+.5f}  E[R]={rep.rhs_estimate:+.5f} +- {rep.std_error:.5f}  z={rep.z_score:.2f}")
