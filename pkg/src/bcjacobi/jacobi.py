"""Heckman-Opdam Jacobi polynomials of type BC_q.

``P_lam = M_lam + sum_{mu < lam} c_{lam,mu} M_mu`` is fixed by orthogonality of
``P_lam`` to every ``M_mu`` with ``mu`` strictly below ``lam`` in the dominance
order, where ``M_mu`` is the Weyl orbit sum.  The coefficients come from one
linear solve against the Gram matrix of the lower set, with Gram entries
computed by alcove quadrature.  ``R_lam = c(lam + rho, m) P_lam`` is the
normalization with ``R_lam(0) = 1``; the c-function is evaluated in closed form
so ``R_lam(0) = 1`` is a genuine check of the quadrature route.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import GammaPole, IllConditioned
from .quadrature import QuadratureGrid, build_grid
from .roots import LONG, DominantWeight, lambda_alpha, lower_set, orbit_array, positive_roots, rho

DEFAULT_ORDER = 64
DEFAULT_CONDITION_BOUND = 1e12


def orbit_sum(lam, x) -> np.ndarray:
    """``M_lam(x) = sum_{gamma in W.lam} cos<gamma, x>`` for ``x`` of shape ``(..., q)``.

    The sine parts cancel because ``-id`` is in the Weyl group.
    """
    x = np.asarray(x, dtype=float)
    orbit = orbit_array(lam)
    return np.cos(x @ orbit.T).sum(axis=-1)


def orbit_size(lam) -> int:
    return len(orbit_array(lam))


def _grid_orbit_values(grid: QuadratureGrid, lam: DominantWeight) -> np.ndarray:
    key = lam.entries
    vals = grid._orbit_cache.get(key)
    if vals is None:
        vals = orbit_sum(lam, grid.nodes)
        grid._orbit_cache[key] = vals
    return vals


def c_function(lam, profile) -> float:
    """Closed-form ``c(lam + rho, m)``, a product of Gamma ratios over positive roots.

    Raises
    ------
    GammaPole
        If a Gamma argument is not strictly positive.
    """
    lam = DominantWeight.coerce(lam, 1)
    r = rho(profile)
    m1 = profile.multiplicities[0]
    log_c = 0.0
    for root, m in positive_roots(profile):
        if m == 0:
            continue
        half = m1 / 4 if root.multiplicity_class == LONG else 0.0
        la = lambda_alpha(lam, root)
        ra = lambda_alpha(r, root)
        args = (la + ra + half, ra + half + m / 2, la + ra + half + m / 2, ra + half)
        if min(args) <= 0:
            raise GammaPole(f"nonpositive Gamma argument {min(args)} for root {root.vector}")
        log_c += gammaln(args[0]) + gammaln(args[1]) - gammaln(args[2]) - gammaln(args[3])
    return float(np.exp(log_c))


@dataclass(frozen=True)
class JacobiPolynomial:
    """``R_lam`` expanded over orbit sums.

    Attributes
    ----------
    lam : DominantWeight
    multiplicities : tuple
        The ``(m1, m2, m3)`` the polynomial is orthogonal for.
    coeffs : dict
        ``mu -> c_{lam,mu}`` over ``lower_set(lam)``, with ``c_{lam,lam} = 1``.
    c_value : float
        ``c(lam + rho, m)``.
    norm_sq : float
        ``||R_lam||_m^2`` by quadrature.
    gram_condition : float
        Condition number of the (diagonally scaled) lower-set Gram matrix.
    """

    lam: DominantWeight
    multiplicities: tuple
    coeffs: dict = field(compare=False)
    c_value: float
    norm_sq: float
    gram_condition: float
    order: int

    @property
    def q(self) -> int:
        return self.lam.q

    @property
    def plancherel_weight(self) -> float:
        """``r_lam = 1 / ||R_lam||^2``."""
        return 1.0 / self.norm_sq

    @property
    def p_at_zero(self) -> float:
        return float(sum(c * orbit_size(mu) for mu, c in self.coeffs.items()))

    def eval_P(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return sum(c * orbit_sum(mu, x) for mu, c in self.coeffs.items())

    def __call__(self, x):
        return eval_R(self, x)


def eval_R(poly: JacobiPolynomial, x):
    """``R_lam(x) = c(lam + rho) P_lam(x)``; ``x`` of shape ``(q,)`` or ``(N, q)``."""
    x = np.asarray(x, dtype=float)
    out = poly.c_value * poly.eval_P(x)
    return float(out) if np.ndim(out) == 0 else out


def gram_schmidt(
    lam,
    profile,
    grid: QuadratureGrid,
    condition_bound: float = DEFAULT_CONDITION_BOUND,
) -> JacobiPolynomial:
    """Construct ``R_lam`` from the orthogonality conditions.

    Solves ``sum_{mu < lam} c_mu <M_mu, M_nu> = -<M_lam, M_nu>`` for all
    ``nu < lam``.

    Raises
    ------
    IllConditioned
        If the scaled Gram matrix condition number exceeds ``condition_bound``.
    """
    lam = DominantWeight.coerce(lam, profile.lattice_scale if hasattr(profile, "lattice_scale") else 2)
    if lam.q != profile.q:
        raise ValueError(f"weight {lam} does not have rank {profile.q}")
    lower = lower_set(lam, lam.scale)
    below = lower[:-1]
    measure = grid.measure(profile)
    coeffs = {lam: 1.0}
    cond = 1.0
    if below:
        basis = np.array([_grid_orbit_values(grid, mu) for mu in below])
        top = _grid_orbit_values(grid, lam)
        gram = (basis * measure) @ basis.T
        rhs = -(basis * measure) @ top
        scale = 1.0 / np.sqrt(np.diag(gram))
        scaled = gram * np.outer(scale, scale)
        cond = float(np.linalg.cond(scaled))
        if not np.isfinite(cond) or cond > condition_bound:
            raise IllConditioned(cond, condition_bound)
        sol = scale * np.linalg.solve(scaled, scale * rhs)
        coeffs = {mu: float(c) for mu, c in zip(below, sol)}
        coeffs[lam] = 1.0
    c_val = c_function(lam, profile)
    values = c_val * sum(c * _grid_orbit_values(grid, mu) for mu, c in coeffs.items())
    norm_sq = float(np.dot(measure, values * values))
    return JacobiPolynomial(
        lam=lam,
        multiplicities=tuple(profile.multiplicities),
        coeffs=coeffs,
        c_value=c_val,
        norm_sq=norm_sq,
        gram_condition=cond,
        order=grid.order,
    )


@lru_cache(maxsize=64)
def get_grid(q: int, order: int = DEFAULT_ORDER, scheme: str = "simplex") -> QuadratureGrid:
    """Shared quadrature grid (grids are read-only apart from value caches)."""
    return build_grid(q, order, scheme)


_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


def jacobi_polynomial(lam, profile, order: int = DEFAULT_ORDER, scheme: str = "simplex") -> JacobiPolynomial:
    """Cached :func:`gram_schmidt` keyed by (multiplicities, lam, order, scheme)."""
    lam = DominantWeight.coerce(lam, profile.lattice_scale if hasattr(profile, "lattice_scale") else 2)
    key = (profile.q, tuple(profile.multiplicities), lam.entries, lam.scale, order, scheme)
    poly = _CACHE.get(key)
    if poly is None:
        poly = gram_schmidt(lam, profile, get_grid(profile.q, order, scheme))
        with _CACHE_LOCK:
            _CACHE[key] = poly
    return poly


def clear_cache():
    with _CACHE_LOCK:
        _CACHE.clear()
    get_grid.cache_clear()
