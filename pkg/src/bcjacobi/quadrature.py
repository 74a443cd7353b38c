"""Integration over the closed fundamental alcove against the weight ``w_m``.

The alcove is ``pi/2 >= x_1 >= ... >= x_q >= 0``.  Two tensor Gauss-Legendre
schemes are provided:

``"simplex"`` (default)
    Collapsed coordinates ``x_1 = t``, ``x_k = x_{k-1} s_k`` with
    ``t in [0, pi/2]``, ``s_k in [0, 1]``.  Every factor ``sin<alpha, x>`` of
    the weight is nonnegative on the alcove, so wall singularities such as
    ``|sin(x_1 - x_2)|^{m3}`` with odd ``m3`` sit on the boundary of the
    parameter cube where Gauss-Legendre converges algebraically fast.

``"box"``
    Nodes on ``[0, pi/2]^q`` sorted into the alcove, weights divided by ``q!``.
    Valid for permutation-symmetric integrands, but the kink of
    ``|sin(x_i - x_j)|`` along the box diagonal limits accuracy to about
    ``1e-4`` when ``m3 = 1``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .roots import positive_roots

HALF_PI = np.pi / 2
ALCOVE_TOL = 1e-12


def in_alcove(x, tol: float = ALCOVE_TOL) -> np.ndarray:
    """Membership test for the closed alcove, vectorized over leading axes."""
    x = np.asarray(x, dtype=float)
    ok = (x[..., 0] <= HALF_PI + tol) & (x[..., -1] >= -tol)
    if x.shape[-1] > 1:
        ok &= np.all(np.diff(x, axis=-1) <= tol, axis=-1)
    return ok


def check_alcove(x, q: int | None = None) -> np.ndarray:
    """Return ``x`` as a float array, raising ``ValueError`` outside the closed alcove."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if q is not None and x.shape[-1] != q:
        raise ValueError(f"expected points in R^{q}, got shape {x.shape}")
    if not np.all(in_alcove(x)):
        raise ValueError(f"point(s) outside the closed alcove pi/2 >= x_1 >= ... >= x_q >= 0: {x}")
    return x


def weight_w_m(x, profile) -> np.ndarray:
    """``prod_{alpha > 0} |2 sin<alpha, x>|^{m_alpha}`` at points ``x`` (shape ``(..., q)``)."""
    x = np.asarray(x, dtype=float)
    out = np.ones(x.shape[:-1])
    for root, m in positive_roots(profile):
        if m == 0:
            continue
        out = out * np.abs(2 * np.sin(x @ root.array)) ** m
    return out


def _gauss_legendre(n: int, a: float, b: float):
    t, w = leggauss(n)
    return (a + b) / 2 + (b - a) / 2 * t, (b - a) / 2 * w


@dataclass
class QuadratureGrid:
    """Nodes in the closed alcove with positive weights summing to its volume."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    scheme: str = "simplex"
    _weight_cache: dict = field(default_factory=dict, repr=False, compare=False)
    _orbit_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return len(self.weights)

    def measure(self, profile) -> np.ndarray:
        """Node weights multiplied by ``w_m`` (cached per multiplicity triple)."""
        key = tuple(profile.multiplicities)
        if key not in self._weight_cache:
            self._weight_cache[key] = self.weights * weight_w_m(self.nodes, profile)
        return self._weight_cache[key]

    def integrate(self, values, profile=None) -> float:
        """Quadrature sum of ``values`` at the nodes, against ``w_m`` if ``profile`` is given."""
        w = self.weights if profile is None else self.measure(profile)
        return float(np.dot(w, values))


def build_grid(profile_or_q, order: int = 64, scheme: str = "simplex") -> QuadratureGrid:
    """Tensor Gauss-Legendre grid with ``order`` nodes per dimension.

    Parameters
    ----------
    profile_or_q : RankProfile or int
        Only the rank is used.
    order : int
        Nodes per dimension, at least 2.
    scheme : {"simplex", "box"}
        See the module docstring.
    """
    q = profile_or_q if isinstance(profile_or_q, (int, np.integer)) else profile_or_q.q
    if order < 2:
        raise ValueError("quadrature order must be at least 2")
    if scheme == "box":
        x, w = _gauss_legendre(order, 0.0, HALF_PI)
        nodes = np.array(list(itertools.product(x, repeat=q)))
        weights = np.prod(np.array(list(itertools.product(w, repeat=q))), axis=1)
        nodes = -np.sort(-nodes, axis=1)
        weights = weights / math.factorial(q)
    elif scheme == "simplex":
        t, wt = _gauss_legendre(order, 0.0, HALF_PI)
        s, ws = _gauss_legendre(order, 0.0, 1.0)
        idx = np.array(list(itertools.product(range(order), repeat=q)))
        nodes = np.empty((len(idx), q))
        weights = wt[idx[:, 0]].copy()
        nodes[:, 0] = t[idx[:, 0]]
        for k in range(1, q):
            # dx_k = x_{k-1} ds_k
            weights *= ws[idx[:, k]] * nodes[:, k - 1]
            nodes[:, k] = nodes[:, k - 1] * s[idx[:, k]]
    else:
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    return QuadratureGrid(nodes, weights, order, scheme)


def alcove_volume(q: int) -> float:
    return HALF_PI**q / math.factorial(q)


def inner_product(f, g, profile, grid: QuadratureGrid) -> float:
    """``<f, g>_m``, the integral of ``f g w_m`` over the alcove.

    ``f`` and ``g`` are real callables on ``(N, q)`` point arrays or arrays of
    node values.
    """
    fv = f(grid.nodes) if callable(f) else np.asarray(f)
    gv = g(grid.nodes) if callable(g) else np.asarray(g)
    return grid.integrate(fv * gv, profile)


def refinement_residual(fn, profile, order: int, scheme: str = "simplex") -> float:
    """``|I_n - I_{2n}|`` for the weighted integral of ``fn``; a quadrature quality metric."""
    coarse = build_grid(profile, order, scheme)
    fine = build_grid(profile, 2 * order, scheme)
    return abs(coarse.integrate(fn(coarse.nodes), profile) - fine.integrate(fn(fine.nodes), profile))
