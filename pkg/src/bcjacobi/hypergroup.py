"""Monte Carlo realization of the convolution ``delta_x * delta_y`` on the alcove.

The convolution of point masses is the image of ``dv dw`` (Haar on the
unitary group, Lebesgue on the matrix ball) under the kernel ``d(x, y, v, w)``
with density ``Delta(I - w* w)^{mu - gamma} / kappa_mu``.  Sampling ``v`` and
``w`` uniformly and self-normalizing the weights ``Delta^{mu - gamma}`` yields
an exact probability measure without knowing ``kappa_mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RejectionBudgetExceeded
from .jacobi import JacobiPolynomial, jacobi_polynomial
from .matrices import (
    RNG_NAME,
    MatrixF,
    kernel_d,
    log_delta_ball,
    make_rng,
    sample_ball,
    sample_haar_unitary,
    spawn,
)
from .quadrature import QuadratureGrid, check_alcove, in_alcove
from .roots import FIELD_NAMES, DominantWeight, weights_up_to_l1

KERNEL_CHUNK = 1 << 17


# --- samples --------------------------------------------------------------


@dataclass(frozen=True)
class KernelSamples:
    """Pairs ``(v_i, w_i)`` with log importance weights."""

    v: MatrixF
    w: MatrixF
    log_weight: np.ndarray
    method: str = "rejection"

    def __len__(self):
        return len(self.log_weight)

    def adjoint(self) -> "KernelSamples":
        """``(v*, w*)``; both sampling measures and the weights are adjoint invariant."""
        return KernelSamples(self.v.adjoint(), self.w.adjoint(), self.log_weight, self.method)

    def normalized_weights(self) -> np.ndarray:
        lw = self.log_weight
        top = np.max(lw)
        if not np.isfinite(top):
            raise ValueError("no sample carries positive weight")
        wt = np.exp(lw - top)
        return wt / wt.sum()

    def tile(self, k: int) -> "KernelSamples":
        """``k`` consecutive copies of the whole sample set."""

        def rep(m):
            return MatrixF(m.field, np.tile(m.data, (k,) + (1,) * (m.data.ndim - 1)))

        return KernelSamples(rep(self.v), rep(self.w), np.tile(self.log_weight, k), self.method)

    def __getitem__(self, idx):
        return KernelSamples(self.v[idx], self.w[idx], self.log_weight[idx], self.method)


def _haar_full_orthogonal(q, n, rng):
    g = rng.standard_normal((n, q, q))
    qm, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return MatrixF("R", qm * np.sign(diag)[:, None, :])


def _polar_ball(profile, n, rng):
    """``w = U diag(s) V*`` with ``s`` uniform on ``[0,1)^q`` and Haar ``U, V``.

    Lebesgue measure on the ball has density proportional to
    ``prod_{i<j} |s_i^2 - s_j^2|^d prod_i s_i^{d-1}`` in these coordinates;
    its log is returned for use as an importance weight.
    """
    q, d = profile.q, profile.d
    field = FIELD_NAMES[d]
    s = rng.uniform(0.0, 1.0, (n, q))
    if field == "R":
        u = _haar_full_orthogonal(q, n, rng)
        vt = _haar_full_orthogonal(q, n, rng)
    else:
        u = sample_haar_unitary(profile, rng, size=n)
        vt = sample_haar_unitary(profile, rng, size=n)
    diag = MatrixF.from_complex(s[:, :, None] * np.eye(q), field)
    w = u @ diag @ vt.adjoint()
    with np.errstate(divide="ignore"):
        log_jac = (d - 1) * np.sum(np.log(s), axis=-1)
        for i in range(q):
            for j in range(i + 1, q):
                log_jac = log_jac + d * np.log(np.abs(s[:, i] ** 2 - s[:, j] ** 2))
    return w, -np.sort(-s, axis=-1), log_jac


def draw_kernel_samples(profile, n: int, rng, method: str = "auto", acceptance_floor: float = 1e-4) -> KernelSamples:
    """Draw ``n`` pairs ``(v, w)`` with log weights ``(mu - gamma) log Delta(I - w* w)``.

    ``method="rejection"`` samples ``w`` uniformly on the ball by rejection
    from a cube.  ``"polar"`` uses singular-value coordinates with the
    Lebesgue Jacobian folded into the weight; it is the fallback of ``"auto"``
    when the rejection acceptance rate is below ``acceptance_floor``.
    """
    rng = make_rng(rng)
    v = sample_haar_unitary(profile, rng, size=n)
    exponent = profile.mu - profile.gamma
    if method in ("auto", "rejection"):
        try:
            ball = sample_ball(profile, n, rng, acceptance_floor)
            log_w = exponent * ball.log_delta if exponent != 0 else np.zeros(n)
            return KernelSamples(v, ball.w, log_w, "rejection")
        except RejectionBudgetExceeded:
            if method == "rejection":
                raise
    elif method != "polar":
        raise ValueError(f"unknown sampling method {method!r}")
    w, sv, log_jac = _polar_ball(profile, n, rng)
    log_w = log_jac + (exponent * log_delta_ball(None, sv) if exponent != 0 else 0.0)
    return KernelSamples(v, w, log_w, "polar")


def kernel_atoms(x, y, samples: KernelSamples, chunk: int = KERNEL_CHUNK) -> np.ndarray:
    """``d(x, y, v_i, w_i)`` for all samples, evaluated in chunks."""
    n = len(samples)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.empty((n, samples.v.q))
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        xs = x[sl] if x.ndim == 2 else x
        ys = y[sl] if y.ndim == 2 else y
        out[sl] = kernel_d(xs, ys, samples.v[sl], samples.w[sl])
    return out


# --- measures -------------------------------------------------------------


@dataclass
class EmpiricalMeasure:
    """Weighted atoms in the closed alcove with weights summing to one."""

    atoms: np.ndarray
    weights: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return float(math.fsum(self.weights))

    def expect(self, f) -> tuple[float, float]:
        """Weighted mean of ``f`` over the atoms and its delta-method standard error."""
        vals = f(self.atoms) if callable(f) else np.asarray(f)
        est = float(np.dot(self.weights, vals))
        se = float(np.sqrt(np.dot(self.weights**2, (vals - est) ** 2)))
        return est, se

    def effective_sample_size(self) -> float:
        return float(1.0 / np.sum(self.weights**2))

    def sup_norms(self) -> np.ndarray:
        return np.max(np.abs(self.atoms), axis=-1)


def _seed_of(rng):
    return rng if isinstance(rng, (int, np.integer)) else None


def _point_mass(x, profile, n_samples, seed) -> EmpiricalMeasure:
    return EmpiricalMeasure(
        np.array([x], dtype=float),
        np.array([1.0]),
        dict(profile=profile, seed=seed, n_samples=n_samples, rng=RNG_NAME, method="point-mass"),
    )


def convolve(x, y, profile, n_samples: int, rng=None, samples: KernelSamples | None = None) -> EmpiricalMeasure:
    """``delta_x * delta_y`` as a self-normalized importance-sampled measure.

    When ``x`` or ``y`` is the neutral element 0 the exact point mass at the
    other argument is returned.  Passing ``samples`` reuses a fixed set of
    ``(v, w)`` pairs (used for paired commutativity tests).
    """
    x = check_alcove(x, profile.q)
    y = check_alcove(y, profile.q)
    seed = _seed_of(rng)
    if not np.any(y):
        return _point_mass(x, profile, n_samples, seed)
    if not np.any(x):
        return _point_mass(y, profile, n_samples, seed)
    if samples is None:
        samples = draw_kernel_samples(profile, n_samples, make_rng(rng))
    atoms = kernel_atoms(x, y, samples)
    meta = dict(profile=profile, seed=seed, n_samples=len(samples), rng=RNG_NAME, method=samples.method)
    return EmpiricalMeasure(atoms, samples.normalized_weights(), meta)


@dataclass(frozen=True)
class ConvolutionReport:
    lhs: float
    rhs_estimate: float
    std_error: float
    z_score: float
    n_samples: int
    seed: int | None = None


def _z(lhs, rhs, se, floor=1e-12):
    """``|lhs - rhs| / se``; differences at rounding level count as zero."""
    diff = abs(lhs - rhs)
    if diff <= floor * max(1.0, abs(lhs)):
        return 0.0
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.inf


def _poly(lam, profile, order=64, scheme="simplex") -> JacobiPolynomial:
    if isinstance(lam, JacobiPolynomial):
        return lam
    return jacobi_polynomial(lam, profile, order, scheme)


def product_formula_check(
    lam,
    x,
    y,
    profile,
    n_samples: int,
    rng=None,
    measure: EmpiricalMeasure | None = None,
    order: int = 64,
) -> ConvolutionReport:
    """Compare ``R_lam(x) R_lam(y)`` with the Monte Carlo integral of ``R_lam`` against ``delta_x * delta_y``."""
    poly = _poly(lam, profile, order)
    x = check_alcove(x, profile.q)
    y = check_alcove(y, profile.q)
    if measure is None:
        measure = convolve(x, y, profile, n_samples, rng)
    lhs = poly(x) * poly(y)
    rhs, se = measure.expect(poly)
    return ConvolutionReport(lhs, rhs, se, _z(lhs, rhs, se), measure.metadata.get("n_samples", n_samples),
                             measure.metadata.get("seed"))


# --- hypergroup axioms ----------------------------------------------------


@dataclass(frozen=True)
class AssociativityReport:
    """Two nested Monte Carlo estimates of ``f`` against a triple convolution."""

    lhs: float
    rhs: float
    std_error: float
    lhs_std_error: float
    rhs_std_error: float
    n_outer: int
    n_inner: int
    n_batches: int

    @property
    def z_score(self) -> float:
        return _z(self.lhs, self.rhs, self.std_error)


def _nested_estimate(a, b, fixed, outer_left, profile, test_fn, n_outer, n_inner, rng):
    """One batch: atoms of ``delta_a * delta_b``, each convolved with ``fixed``.

    ``outer_left`` puts the atom on the left of ``fixed``.  All atoms share
    one inner sample pool.
    """
    rng_outer, rng_inner = spawn(rng, 2)
    outer = convolve(a, b, profile, n_outer, rng_outer)
    inner = draw_kernel_samples(profile, n_inner, rng_inner)
    inner_w = inner.normalized_weights()
    fixed = np.asarray(fixed, dtype=float)
    atoms = outer.atoms
    k = len(atoms)
    moving = np.repeat(atoms, n_inner, axis=0)
    if outer_left:
        z = kernel_atoms(moving, fixed, inner.tile(k))
    else:
        z = kernel_atoms(fixed, moving, inner.tile(k))
    vals = test_fn(z).reshape(k, n_inner)
    return float(outer.weights @ (vals @ inner_w))


def associativity_check(
    x,
    y,
    z,
    test_fn: Callable,
    profile,
    n_outer: int,
    n_inner: int,
    rng=None,
    n_batches: int = 20,
) -> AssociativityReport:
    """Estimate ``((delta_x * delta_y) * delta_z)(f)`` and ``(delta_x * (delta_y * delta_z))(f)``.

    Each batch draws ``n_outer`` outer atoms and one shared pool of
    ``n_inner`` inner samples reused for every outer atom.  Standard errors
    come from the spread of ``n_batches`` independent batches; the
    self-normalization bias is ``O(1 / n_inner)``.
    """
    x = check_alcove(x, profile.q)
    y = check_alcove(y, profile.q)
    z = check_alcove(z, profile.q)
    rng = make_rng(rng)
    left, right = [], []
    for child in spawn(rng, n_batches):
        r_left, r_right = spawn(child, 2)
        left.append(_nested_estimate(x, y, z, True, profile, test_fn, n_outer, n_inner, r_left))
        right.append(_nested_estimate(y, z, x, False, profile, test_fn, n_outer, n_inner, r_right))
    left, right = np.array(left), np.array(right)
    se_l = float(left.std(ddof=1) / math.sqrt(n_batches)) if n_batches > 1 else 0.0
    se_r = float(right.std(ddof=1) / math.sqrt(n_batches)) if n_batches > 1 else 0.0
    return AssociativityReport(
        float(left.mean()), float(right.mean()), math.hypot(se_l, se_r), se_l, se_r, n_outer, n_inner, n_batches
    )


@dataclass(frozen=True)
class HaarReport:
    """``int (tau_z R_lam)(x) w_m(x) dx`` estimated on a quadrature grid."""

    value: float
    std_error: float
    n_nodes: int
    n_samples: int

    @property
    def residual(self) -> float:
        return abs(self.value)


def haar_check(
    lam,
    z,
    profile,
    grid: QuadratureGrid,
    n_samples: int,
    rng=None,
    node_chunk: int = 32,
) -> HaarReport:
    """Integrate the translate ``x -> (delta_z * delta_x)(R_lam)`` against ``w_m``.

    Each quadrature node gets its own ``n_samples`` inner samples, so node
    errors are independent and the reported standard error is their
    quadrature-weighted combination.  Nodes carrying zero weight are skipped.
    """
    lam = DominantWeight.coerce(lam, profile.lattice_scale)
    if not any(lam.entries):
        raise ValueError("haar_check needs lam != 0: the integral of R_0 = 1 is <1, 1>_m")
    poly = _poly(lam, profile, grid.order, grid.scheme)
    z = check_alcove(z, profile.q)
    measure = grid.measure(profile)
    if not np.any(z):
        return HaarReport(float(np.dot(measure, poly(grid.nodes))), 0.0, len(grid), n_samples)
    live = np.flatnonzero(measure > 0)
    nodes, measure = grid.nodes[live], measure[live]
    rng = make_rng(rng)
    n_chunks = -(-len(nodes) // node_chunk)
    means = np.empty(len(nodes))
    variances = np.empty(len(nodes))
    for start, child in zip(range(0, len(nodes), node_chunk), spawn(rng, n_chunks)):
        block = nodes[start:start + node_chunk]
        k = len(block)
        samples = draw_kernel_samples(profile, k * n_samples, child)
        atoms = kernel_atoms(z, np.repeat(block, n_samples, axis=0), samples)
        vals = poly(atoms).reshape(k, n_samples)
        lw = samples.log_weight.reshape(k, n_samples)
        wt = np.exp(lw - lw.max(axis=1, keepdims=True))
        wt /= wt.sum(axis=1, keepdims=True)
        est = np.sum(wt * vals, axis=1)
        means[start:start + k] = est
        variances[start:start + k] = np.sum(wt**2 * (vals - est[:, None]) ** 2, axis=1)
    value = float(np.dot(measure, means))
    se = float(np.sqrt(np.dot(measure**2, variances)))
    return HaarReport(value, se, len(nodes), n_samples)


def involution_probe(x, profile, n_samples: int, rng=None) -> float:
    """``min ||z||_inf`` over the atoms of ``delta_x * delta_x`` (tends to 0: the involution is the identity)."""
    meas = convolve(x, x, profile, n_samples, rng)
    return float(meas.sup_norms().min())


# --- Fourier analysis -----------------------------------------------------


def fourier_transform(f, weight_set, profile, grid: QuadratureGrid) -> dict:
    """``lam -> <f, R_lam>_m`` (the characters are real)."""
    fv = f(grid.nodes) if callable(f) else np.asarray(f)
    measure = grid.measure(profile)
    out = {}
    for lam in weight_set:
        poly = _poly(DominantWeight.coerce(lam, profile.lattice_scale), profile, grid.order, grid.scheme)
        out[poly.lam] = float(np.dot(measure, fv * poly(grid.nodes)))
    return out


@dataclass(frozen=True)
class PlancherelReport:
    lhs: float
    rhs: float
    residual: float
    terms: dict


def expansion(coeffs: dict, profile, order: int = 64, scheme: str = "simplex") -> Callable:
    """The function ``sum_lam a_lam R_lam`` for a dict ``lam -> a_lam``."""
    polys = [(_poly(DominantWeight.coerce(l, profile.lattice_scale), profile, order, scheme), a) for l, a in coeffs.items()]

    def f(x):
        return sum(a * p(x) for p, a in polys)

    return f


def plancherel_check(coeffs: dict, profile, grid: QuadratureGrid, weight_set=None) -> PlancherelReport:
    """``||f||^2`` against ``sum_nu r_nu |f^(nu)|^2`` for ``f = sum a_lam R_lam``.

    ``weight_set`` defaults to all weights up to the largest ``|lam|_1`` in
    the expansion, so the dual sum is complete.
    """
    lams = [DominantWeight.coerce(l, profile.lattice_scale) for l in coeffs]
    if weight_set is None:
        weight_set = weights_up_to_l1(profile.q, max(l.l1 for l in lams), profile.lattice_scale)
    f = expansion(dict(zip(lams, coeffs.values())), profile, grid.order, grid.scheme)
    fv = f(grid.nodes)
    lhs = grid.integrate(fv * fv, profile)
    hat = fourier_transform(fv, weight_set, profile, grid)
    terms = {}
    for lam, val in hat.items():
        poly = _poly(lam, profile, grid.order, grid.scheme)
        terms[lam] = poly.plancherel_weight * val * val
    rhs = float(math.fsum(terms.values()))
    return PlancherelReport(lhs, rhs, abs(lhs - rhs), terms)


def support_excess(measure: EmpiricalMeasure, x, y) -> float:
    """``max ||z||_inf - (||x||_inf + ||y||_inf)`` over atoms (nonpositive when the bound holds)."""
    bound = np.max(np.abs(x)) + np.max(np.abs(y))
    return float(measure.sup_norms().max() - bound)


def atoms_in_alcove(measure: EmpiricalMeasure) -> bool:
    return bool(np.all(in_alcove(measure.atoms)))
