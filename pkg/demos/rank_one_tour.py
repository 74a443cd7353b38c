"""Rank one: multivariate machinery against classical Jacobi polynomials.

Builds R_lam for q = 1 through the Gram solve and compares it with the
three-term recurrence, then evaluates both sides of the Koornwinder product
formula for one pair of points.
"""

import math

import numpy as np

from bcjacobi.jacobi import jacobi_polynomial
from bcjacobi.rank1 import koornwinder_product, rank1_param_map
from bcjacobi.roots import RankProfile

prof = RankProfile(1, 2, 3)
dictionary = rank1_param_map(prof)
x = np.linspace(0, math.pi / 2, 7)

print(f"profile {prof}: alpha={dictionary.alpha:g}, beta={dictionary.beta:g}")
for lam in range(0, 11, 2):
    ours = jacobi_polynomial((lam,), prof)(x[:, None])
    ref = dictionary.evaluate(lam, x)
    print(f"  lam={lam:2d}  max |diff| = {np.max(np.abs(ours - ref)):.1e}")

t, s = math.cos(0.8), math.cos(1.9)
for lam in (2, 4, 6):
    params = dictionary.params(lam)
    lhs = dictionary.evaluate(lam, 0.4) * dictionary.evaluate(lam, 0.95)
    print(f"  product formula n={params.n}: {lhs:+.15f} vs {koornwinder_product(params, t, s):+.15f}")
