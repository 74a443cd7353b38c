"""Closed-form rank-one ground truth.

Classical Jacobi polynomials normalized at ``t = 1``, the dictionary between
rank-one profiles and classical parameters, and a quadrature of Koornwinder's
product formula

    R_n(t) R_n(s) = int R_n(((1+t)(1+s) + (1-t)(1-s) r^2)/2
                             + sqrt((1-t^2)(1-s^2)) r cos(theta) - 1) dm(r, theta)

with ``dm ~ (1 - r^2)^{a-b-1} r^{2b+1} sin(theta)^{2b} dr dtheta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import eigh_tridiagonal


@dataclass(frozen=True)
class ClassicalJacobiParams:
    """Parameters ``(alpha, beta, n)`` of ``R_n^{(alpha, beta)}``."""

    alpha: float
    beta: float
    n: int

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise ValueError(f"need alpha, beta > -1, got ({self.alpha}, {self.beta})")
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"degree must be a nonnegative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def admits_product_formula(self) -> bool:
        return self.alpha > self.beta >= -0.5


def _recurrence_P(n, a, b, t):
    """Unnormalized ``P_n^{(a,b)}(t)`` by the standard three-term recurrence."""
    t = np.asarray(t, dtype=float)
    p_prev = np.ones_like(t)
    if n == 0:
        return p_prev
    p = (a + 1) + (a + b + 2) * (t - 1) / 2
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c0 = 2 * k * (k + a + b) * (s - 2)
        c1 = (s - 1) * (s * (s - 2) * t + a * a - b * b)
        c2 = 2 * (k + a - 1) * (k + b - 1) * s
        p_prev, p = p, (c1 * p - c2 * p_prev) / c0
    return p


def _hyp_sum(n, a, b, u) -> float:
    """``2F1(-n, n + a + b + 1; a + 1; u)`` summed exactly in rational arithmetic.

    Float inputs are exact binary rationals, so the only rounding is the
    final conversion; the alternating terms cannot cancel digits away.
    """
    a, b, u = Fraction(a), Fraction(b), Fraction(u)
    total = Fraction(0)
    term = Fraction(1)
    for k in range(n + 1):
        total += term
        term *= (k - n) * (n + a + b + 1 + k) * u / ((a + 1 + k) * (k + 1))
    return float(total)


def classical_R(params: ClassicalJacobiParams, t, method: str = "recurrence"):
    """``R_n^{(alpha, beta)}(t) = P_n(t) / P_n(1)``, so ``R_n(1) = 1``.

    Parameters
    ----------
    params : ClassicalJacobiParams
    t : float or array_like
        Points in ``[-1, 1]``.
    method : {"recurrence", "hypergeometric"}
        ``"hypergeometric"`` sums the terminating series
        ``sum_k (-n)_k (n+a+b+1)_k / ((a+1)_k k!) ((1-t)/2)^k``.
    """
    a, b, n = params.alpha, params.beta, params.n
    t_arr = np.asarray(t, dtype=float)
    if method == "recurrence":
        p1 = math.exp(math.lgamma(a + 1 + n) - math.lgamma(a + 1) - math.lgamma(n + 1))
        out = _recurrence_P(n, a, b, t_arr) / p1
    elif method == "hypergeometric":
        flat = [_hyp_sum(n, a, b, (1 - float(v)) / 2) for v in t_arr.ravel()]
        out = np.array(flat).reshape(t_arr.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Rank1Map:
    """How a rank-one ``R_lam`` reads as a classical Jacobi polynomial.

    ``R_lam(x) = R_n^{(alpha, beta)}(cos(angle_factor * x))`` with
    ``n = lam / degree_divisor``.
    """

    alpha: float
    beta: float
    angle_factor: int
    degree_divisor: int

    def params(self, lam) -> ClassicalJacobiParams:
        lam = int(np.ravel(lam)[0]) if np.ndim(lam) else int(lam)
        if lam % self.degree_divisor:
            raise ValueError(f"weight {lam} is not a multiple of {self.degree_divisor}")
        return ClassicalJacobiParams(self.alpha, self.beta, lam // self.degree_divisor)

    def argument(self, x):
        return np.cos(self.angle_factor * np.asarray(x, dtype=float))

    def evaluate(self, lam, x):
        return classical_R(self.params(lam), self.argument(x))


def rank1_param_map(profile) -> Rank1Map:
    """Classical parameters for a ``q = 1`` profile.

    For ``d in {2, 4}``: ``alpha = (m1 + m2 - 1)/2``, ``beta = (m2 - 1)/2``,
    ``n = lam / 2`` and argument ``cos 2x``.  For ``d = 1`` the long root has
    multiplicity 0 and the Gegenbauer form ``alpha = beta = (m1 - 1)/2``,
    ``n = lam``, argument ``cos x`` is used (the two agree for even ``lam``).
    """
    if profile.q != 1:
        raise ValueError("the rank-one dictionary needs q = 1")
    m1, m2 = profile.m1, profile.m2
    if profile.d == 1:
        a = (m1 - 1) / 2
        return Rank1Map(a, a, 1, 1)
    return Rank1Map((m1 + m2 - 1) / 2, (m2 - 1) / 2, 2, 2)


def gauss_jacobi(n: int, a: float, b: float):
    """Gauss rule for ``(1 - x)^a (1 + x)^b`` on ``[-1, 1]`` with weights summing to 1.

    Golub-Welsch on the Jacobi matrix.  The first recurrence coefficients are
    written in a cancellation-free form, which keeps the rule accurate as an
    exponent approaches ``-1/2`` (where the library routines lose about
    five digits).
    """
    if n < 1:
        raise ValueError("need at least one node")
    diag = np.empty(n)
    diag[0] = (b - a) / (a + b + 2)
    if n == 1:
        return diag, np.ones(1)
    k = np.arange(1, n)
    s = 2 * k + a + b
    diag[1:] = (b * b - a * a) / (s * (s + 2))
    off2 = np.empty(n - 1)
    off2[0] = 4 * (a + 1) * (b + 1) / ((a + b + 2) ** 2 * (a + b + 3))
    kk, ss = k[1:], s[1:]
    off2[1:] = 4 * kk * (kk + a) * (kk + b) * (kk + a + b) / (ss**2 * (ss + 1) * (ss - 1))
    x, vec = eigh_tridiagonal(diag, np.sqrt(off2))
    w = vec[0] ** 2
    return x, w / w.sum()


def _product_rule(alpha, beta, order):
    """Nodes ``(r^2, cos theta)`` and weights of the normalized measure ``dm``.

    ``u = r^2`` carries ``(1 - u)^{a-b-1} u^b`` and ``c = cos theta`` carries
    ``(1 - c^2)^{b - 1/2}``; both are Gauss-Jacobi rules.  At ``b = -1/2``
    the angular factor collapses to point masses at ``c = +-1``.
    """
    su, wu = gauss_jacobi(order, alpha - beta - 1, beta)
    u = (1 + su) / 2
    if beta - 0.5 <= -1:
        c, wc = np.array([-1.0, 1.0]), np.array([0.5, 0.5])
    else:
        c, wc = gauss_jacobi(order, beta - 0.5, beta - 0.5)
    return u, wu, c, wc


def koornwinder_product(params: ClassicalJacobiParams, t, s, order: int | None = None) -> float:
    """Right side of the product formula by tensor Gauss-Jacobi quadrature.

    The integrand is a polynomial of degree ``n`` in ``r^2`` and ``r cos theta``
    and odd powers of ``cos theta`` cancel on the symmetric nodes, so
    ``order >= n + 1`` makes the rule exact.  The measure is normalized by the
    rule itself.

    Raises
    ------
    ValueError
        Unless ``alpha > beta >= -1/2`` (``beta = -1/2`` is taken as the
        limiting measure).
    """
    if not params.alpha > params.beta >= -0.5:
        raise ValueError(f"product formula needs alpha > beta >= -1/2, got ({params.alpha}, {params.beta})")
    if not (-1 <= t <= 1 and -1 <= s <= 1):
        raise ValueError("t and s must lie in [-1, 1]")
    order = params.n + 2 if order is None else order
    u, wu, c, wc = _product_rule(params.alpha, params.beta, order)
    r = np.sqrt(u)[:, None]
    arg = ((1 + t) * (1 + s) + (1 - t) * (1 - s) * u[:, None]) / 2 + math.sqrt(max((1 - t * t) * (1 - s * s), 0.0)) * r * c[None, :] - 1
    arg = np.clip(arg, -1.0, 1.0)
    vals = classical_R(params, arg)
    return float(wu @ vals @ wc)
