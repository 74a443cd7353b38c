"""Verification suites: each check carries its estimate, error, threshold and verdict."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln

from .hypergroup import (
    _z as z_score,
    associativity_check,
    convolve,
    draw_kernel_samples,
    haar_check,
    plancherel_check,
    product_formula_check,
    support_excess,
)
from .jacobi import get_grid, jacobi_polynomial
from .matrices import estimate_kappa
from .quadrature import HALF_PI
from .rank1 import classical_R, koornwinder_product, rank1_param_map
from .roots import DominantWeight, weights_up_to_l1

SUITES = ("product", "support", "neutral", "commute", "assoc", "haar", "plancherel", "rank1", "kappa")


@dataclass
class CheckResult:
    suite: str
    name: str
    estimate: float
    reference: float | None
    std_error: float | None
    residual: float
    threshold: float
    passed: bool
    n_samples: int | None = None
    seed: int | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SuiteSettings:
    """Sample sizes and tolerances; defaults match the acceptance targets."""

    product_samples: int = 200_000
    product_pairs: int = 5
    product_max_l1: int = 6
    z_pass: float = 4.0
    z_hard: float = 6.0
    pass_fraction: float = 0.95
    support_slack: float = 1e-12
    neutral_points: int = 10
    commute_samples: int = 20_000
    commute_tol: float = 1e-10
    assoc_triples: int = 3
    assoc_outer: int = 100
    assoc_inner: int = 2_000
    assoc_batches: int = 20
    assoc_z: float = 4.0
    haar_points: int = 3
    haar_grid: int = 32
    haar_samples: int = 10_000
    haar_factor: float = 5e-3
    plancherel_tol: float = 1e-6
    plancherel_terms: int = 4
    rank1_max_n: int = 5
    rank1_points: int = 20
    rank1_tol: float = 1e-8
    koornwinder_max_n: int = 4
    koornwinder_tol: float = 1e-6
    kappa_samples: int = 1_000_000
    kappa_z: float = 3.0
    grid_order: int = 64
    lambdas: list = field(default_factory=list)
    x: np.ndarray | None = None
    y: np.ndarray | None = None


def random_alcove_points(q: int, n: int, rng, margin: float = 0.05) -> np.ndarray:
    """Uniform points of the alcove, kept ``margin`` away from the outer walls."""
    pts = rng.uniform(margin, HALF_PI - margin, (n, q))
    return -np.sort(-pts, axis=1)


def _weights(profile, settings, max_l1):
    if settings.lambdas:
        lams = [DominantWeight.coerce(l, profile.lattice_scale) for l in settings.lambdas]
    else:
        lams = weights_up_to_l1(profile.q, max_l1, profile.lattice_scale)
    return [l for l in lams if any(l.entries)]


def _pairs(profile, settings, rng):
    if settings.x is not None and settings.y is not None:
        return [(np.asarray(settings.x, float), np.asarray(settings.y, float))]
    pts = random_alcove_points(profile.q, 2 * settings.product_pairs, rng)
    return list(zip(pts[0::2], pts[1::2]))


def _fmt(v) -> str:
    return "(" + ",".join(f"{c:.4g}" for c in np.ravel(v)) + ")"


def suite_product(profile, settings, rng, seed=None, measures=None):
    out = []
    zs = []
    for i, (x, y) in enumerate(_pairs(profile, settings, rng)):
        meas = convolve(x, y, profile, settings.product_samples, rng)
        if measures is not None:
            measures.append((x, y, meas))
        for lam in _weights(profile, settings, settings.product_max_l1):
            rep = product_formula_check(lam, x, y, profile, settings.product_samples, measure=meas, order=settings.grid_order)
            zs.append(rep.z_score)
            out.append(CheckResult(
                "product", f"pair{i} x={_fmt(x)} y={_fmt(y)} lambda=({lam})", rep.rhs_estimate, rep.lhs,
                rep.std_error, rep.z_score, settings.z_hard, rep.z_score <= settings.z_hard, settings.product_samples, seed,
            ))
    zs = np.array(zs)
    frac = float(np.mean(zs <= settings.z_pass)) if len(zs) else 1.0
    out.append(CheckResult(
        "product", f"fraction with z <= {settings.z_pass:g}", frac, settings.pass_fraction, None, frac,
        settings.pass_fraction, frac >= settings.pass_fraction, settings.product_samples, seed,
        note=f"{len(zs)} cases, max z {zs.max() if len(zs) else 0.0:.3g}",
    ))
    return out


def suite_support(profile, settings, rng, seed=None, measures=None):
    if measures is None:
        measures = []
        for x, y in _pairs(profile, settings, rng):
            measures.append((x, y, convolve(x, y, profile, settings.product_samples, rng)))
    out = []
    for i, (x, y, meas) in enumerate(measures):
        excess = support_excess(meas, x, y)
        out.append(CheckResult(
            "support", f"pair{i} x={_fmt(x)} y={_fmt(y)}", excess, 0.0, None, excess,
            settings.support_slack, excess <= settings.support_slack, len(meas), seed,
        ))
    return out


def suite_neutral(profile, settings, rng, seed=None):
    out = []
    for i, x in enumerate(random_alcove_points(profile.q, settings.neutral_points, rng, margin=0.0)):
        meas = convolve(x, np.zeros(profile.q), profile, 1, rng)
        dev = float(np.max(np.abs(meas.atoms - x)))
        exact = dev == 0.0 and meas.total_weight == 1.0
        out.append(CheckResult("neutral", f"x={_fmt(x)}", dev, 0.0, None, dev, 0.0, exact, len(meas), seed))
    return out


def suite_commute(profile, settings, rng, seed=None):
    out = []
    samples = draw_kernel_samples(profile, settings.commute_samples, rng)
    adj = samples.adjoint()
    for i, (x, y) in enumerate(_pairs(profile, settings, rng)):
        a = convolve(x, y, profile, len(samples), samples=samples)
        b = convolve(y, x, profile, len(samples), samples=adj)
        dev = float(np.max(np.abs(a.atoms - b.atoms)))
        out.append(CheckResult(
            "commute", f"pair{i} x={_fmt(x)} y={_fmt(y)}", dev, 0.0, None, dev,
            settings.commute_tol, dev <= settings.commute_tol, len(samples), seed,
        ))
    return out


def suite_assoc(profile, settings, rng, seed=None):
    out = []
    lam = _weights(profile, settings, 2)[0]
    poly = jacobi_polynomial(lam, profile, settings.grid_order)
    pts = random_alcove_points(profile.q, 3 * settings.assoc_triples, rng)
    for i in range(settings.assoc_triples):
        x, y, z = pts[3 * i:3 * i + 3]
        rep = associativity_check(x, y, z, poly, profile, settings.assoc_outer, settings.assoc_inner, rng,
                                  settings.assoc_batches)
        out.append(CheckResult(
            "assoc", f"triple{i} x={_fmt(x)} y={_fmt(y)} z={_fmt(z)} lambda=({lam})", rep.lhs, rep.rhs,
            rep.std_error, rep.z_score, settings.assoc_z, rep.z_score <= settings.assoc_z,
            settings.assoc_batches * settings.assoc_outer * settings.assoc_inner, seed,
        ))
    return out


def suite_haar(profile, settings, rng, seed=None):
    out = []
    grid = get_grid(profile.q, settings.haar_grid)
    one = grid.integrate(np.ones(len(grid)), profile)
    lam = _weights(profile, settings, 2)[0]
    poly = jacobi_polynomial(lam, profile, settings.haar_grid)
    bound = settings.haar_factor * math.sqrt(poly.norm_sq) * one
    for i, z in enumerate(random_alcove_points(profile.q, settings.haar_points, rng)):
        rep = haar_check(lam, z, profile, grid, settings.haar_samples, rng)
        out.append(CheckResult(
            "haar", f"z={_fmt(z)} lambda=({lam})", rep.value, 0.0, rep.std_error, rep.residual, bound,
            rep.residual <= bound, rep.n_samples * rep.n_nodes, seed,
        ))
    return out


def _plancherel_sets(profile, settings, rng):
    lams = weights_up_to_l1(profile.q, 6, profile.lattice_scale)
    sets = []
    if profile.q == 1:
        sets.append({lams[1]: 1.0})
    for k in range(1, settings.plancherel_terms + 1):
        chosen = rng.choice(len(lams), size=min(k, len(lams)), replace=False)
        sets.append({lams[j]: float(rng.normal()) for j in sorted(chosen)})
    return sets


def suite_plancherel(profile, settings, rng, seed=None):
    grid = get_grid(profile.q, settings.grid_order)
    out = []
    for coeffs in _plancherel_sets(profile, settings, rng):
        rep = plancherel_check(coeffs, profile, grid)
        label = "+".join(f"{a:.3g}*R({l})" for l, a in coeffs.items())
        out.append(CheckResult(
            "plancherel", f"f={label}", rep.lhs, rep.rhs, None, rep.residual, settings.plancherel_tol,
            rep.residual <= settings.plancherel_tol,
        ))
    return out


def suite_rank1(profile, settings, rng, seed=None):
    if profile.q != 1:
        return [CheckResult("rank1", "skipped", 0.0, None, None, 0.0, 0.0, True, note="rank-one suite needs q = 1")]
    mp = rank1_param_map(profile)
    x = np.linspace(0.0, HALF_PI, settings.rank1_points)
    out = []
    for n in range(settings.rank1_max_n + 1):
        lam = n * mp.degree_divisor
        if lam % profile.lattice_scale:
            continue
        poly = jacobi_polynomial((lam,), profile, settings.grid_order)
        diff = float(np.max(np.abs(poly(x[:, None]) - mp.evaluate(lam, x))))
        out.append(CheckResult(
            "rank1", f"oracle n={n} (alpha={mp.alpha:g}, beta={mp.beta:g})", diff, 0.0, None, diff,
            settings.rank1_tol, diff <= settings.rank1_tol,
        ))
    if mp.alpha > mp.beta >= -0.5 and mp.angle_factor == 2:
        x0, y0 = _pairs(profile, settings, rng)[0]
        t, s = math.cos(2 * x0[0]), math.cos(2 * y0[0])
        meas = convolve(x0, y0, profile, settings.product_samples, rng)
        for n in range(settings.koornwinder_max_n + 1):
            params = mp.params(2 * n)
            k = koornwinder_product(params, t, s)
            lhs = classical_R(params, t) * classical_R(params, s)
            diff = abs(k - lhs)
            out.append(CheckResult(
                "rank1", f"koornwinder vs closed form n={n}", k, lhs, None, diff,
                settings.koornwinder_tol, diff <= settings.koornwinder_tol,
            ))
            est, se = meas.expect(lambda z: classical_R(params, np.cos(2 * z[:, 0])))
            zsc = z_score(est, k, se)
            out.append(CheckResult(
                "rank1", f"koornwinder vs convolution n={n}", est, k, se, zsc, settings.z_pass,
                zsc <= settings.z_pass, settings.product_samples, seed,
            ))
    return out


def kappa_closed_form(profile) -> float:
    """``kappa_mu`` for ``q = 1``: ``pi^{d/2} Gamma(mu - gamma + 1) / Gamma(mu - gamma + 1 + d/2)``."""
    if profile.q != 1:
        raise ValueError("closed form only for q = 1")
    e = profile.mu - profile.gamma + 1
    d = profile.d
    return float(math.exp(d / 2 * math.log(math.pi) + gammaln(e) - gammaln(e + d / 2)))


def suite_kappa(profile, settings, rng, seed=None):
    est, se = estimate_kappa(profile, settings.kappa_samples, rng)
    if profile.q != 1:
        return [CheckResult("kappa", "estimate", est, None, se, 0.0, 0.0, True, settings.kappa_samples, seed,
                            note="no closed form for q > 1")]
    ref = kappa_closed_form(profile)
    z = abs(est - ref) / se
    return [CheckResult("kappa", "estimate vs closed form", est, ref, se, z, settings.kappa_z, z <= settings.kappa_z,
                        settings.kappa_samples, seed)]


_RUNNERS = {
    "product": suite_product,
    "support": suite_support,
    "neutral": suite_neutral,
    "commute": suite_commute,
    "assoc": suite_assoc,
    "haar": suite_haar,
    "plancherel": suite_plancherel,
    "rank1": suite_rank1,
    "kappa": suite_kappa,
}


def suite_rng(seed: int, suite: str) -> np.random.Generator:
    """Independent stream per suite so results do not depend on which suites run together."""
    return np.random.default_rng([int(seed), SUITES.index(suite)])


def run_suites(profile, suites, settings: SuiteSettings | None = None, seed: int = 0) -> list[CheckResult]:
    settings = settings or SuiteSettings()
    unknown = [s for s in suites if s not in _RUNNERS]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {', '.join(SUITES)}")
    results = []
    for name in SUITES:
        if name not in suites:
            continue
        results.extend(_RUNNERS[name](profile, settings, suite_rng(seed, name), seed))
    return results

