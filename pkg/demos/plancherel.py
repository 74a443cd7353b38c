"""Fourier coefficients and the Plancherel identity for a random expansion."""

from bcjacobi.hypergroup import plancherel_check
from bcjacobi.jacobi import get_grid, jacobi_polynomial
from bcjacobi.matrices import make_rng
from bcjacobi.roots import RankProfile, dominant_weights

prof = RankProfile(2, 1, 2.2)
grid = get_grid(prof.q, 64)
rng = make_rng(3)
lams = [w for w in dominant_weights(prof.q, 6) if w.l1 <= 6]
coeffs = {lam: float(rng.normal()) for lam in lams[:4]}

for lam in coeffs:
    p = jacobi_polynomial(lam, prof)
    print(f"lam={lam.entries}: c={p.c_value:.6f}  ||R||^2={p.norm_sq:.6f}  r={p.plancherel_weight:.6f}")
rep = plancherel_check(coeffs, prof, grid)
print(f"||f||^2 = {rep.lhs:.12f}, sum |f^|^2 r = {rep.rhs:.12f}, residual {rep.residual:.1e}")
