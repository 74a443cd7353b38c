import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcjacobi.hypergroup import (
    EmpiricalMeasure,
    associativity_check,
    atoms_in_alcove,
    convolve,
    draw_kernel_samples,
    expansion,
    fourier_transform,
    haar_check,
    involution_probe,
    plancherel_check,
    product_formula_check,
    support_excess,
)
from bcjacobi.jacobi import get_grid, jacobi_polynomial
from bcjacobi.matrices import make_rng, spec_s
from bcjacobi.quadrature import HALF_PI
from bcjacobi.roots import RankProfile

alcove2 = st.tuples(st.floats(0, HALF_PI), st.floats(0, HALF_PI)).map(lambda t: np.array(sorted(t, reverse=True)))


def weighted_mean(values, weights):
    m = float(weights @ values)
    return m, float(np.sqrt(weights**2 @ (values - m) ** 2))


@pytest.mark.parametrize("prof", [RankProfile(2, 1, 2.2), RankProfile(2, 2, 4.6)], ids=str)
def test_polar_sampler_matches_rejection(prof):
    stats = []
    for method in ("rejection", "polar"):
        s = draw_kernel_samples(prof, 60000, make_rng(0), method=method)
        sv = spec_s(s.w)
        wt = s.normalized_weights()
        stats.append([weighted_mean(sv[:, 0] ** 2, wt), weighted_mean(sv[:, -1], wt)])
    for (m1, s1), (m2, s2) in zip(*stats):
        assert abs(m1 - m2) < 5 * math.hypot(s1, s2)


def test_auto_falls_back_to_polar():
    s = draw_kernel_samples(RankProfile(2, 4, 8), 1000, make_rng(1))
    assert s.method == "polar"
    assert np.all(spec_s(s.w)[:, 0] < 1)


def test_unknown_method():
    with pytest.raises(ValueError):
        draw_kernel_samples(RankProfile(1, 2, 2), 10, make_rng(0), method="mcmc")


@given(alcove2)
@settings(max_examples=20, deadline=None)
def test_neutral_element_exact(x):
    prof = RankProfile(2, 2, 4)
    for meas in (convolve(x, [0, 0], prof, 100, 1), convolve([0, 0], x, prof, 100, 1)):
        assert len(meas) == 1
        np.testing.assert_array_equal(meas.atoms[0], x)
        assert meas.weights[0] == 1.0


def test_measure_basics():
    prof = RankProfile(2, 1, 2.2)
    x, y = np.array([1.1, 0.4]), np.array([0.8, 0.6])
    meas = convolve(x, y, prof, 20000, 3)
    assert abs(meas.total_weight - 1) < 1e-12
    assert atoms_in_alcove(meas)
    assert support_excess(meas, x, y) <= 1e-12
    assert meas.metadata["seed"] == 3 and meas.metadata["n_samples"] == 20000
    assert 1000 < meas.effective_sample_size() <= 20000


def test_expect_standard_error_formula():
    meas = EmpiricalMeasure(np.array([[0.0], [1.0]]), np.array([0.25, 0.75]))
    est, se = meas.expect(lambda z: z[:, 0])
    assert est == 0.75
    assert se == pytest.approx(math.sqrt(0.25**2 * 0.75**2 + 0.75**2 * 0.25**2))


def test_determinism():
    prof = RankProfile(2, 2, 4.6)
    a = convolve([1.0, 0.2], [0.7, 0.3], prof, 5000, 11)
    b = convolve([1.0, 0.2], [0.7, 0.3], prof, 5000, 11)
    np.testing.assert_array_equal(a.atoms, b.atoms)
    np.testing.assert_array_equal(a.weights, b.weights)


@pytest.mark.parametrize("prof", [RankProfile(1, 2, 2), RankProfile(2, 1, 2.2), RankProfile(2, 4, 8)], ids=str)
def test_commutativity_with_adjoint_samples(prof):
    x = np.array([1.2, 0.5][: prof.q])
    y = np.array([0.9, 0.1][: prof.q])
    s = draw_kernel_samples(prof, 5000, make_rng(2))
    a = convolve(x, y, prof, 0, samples=s)
    b = convolve(y, x, prof, 0, samples=s.adjoint())
    assert np.max(np.abs(a.atoms - b.atoms)) < 1e-10
    np.testing.assert_array_equal(a.weights, b.weights)


@pytest.mark.parametrize(
    "prof,x,y",
    [
        (RankProfile(1, 2, 2.7), [1.0], [0.6]),
        (RankProfile(1, 4, 5.5), [0.4], [1.3]),
        (RankProfile(2, 2, 4.6), [1.2, 0.5], [0.7, 0.2]),
        (RankProfile(2, 4, 8), [1.0, 0.4], [0.9, 0.3]),
    ],
    ids=str,
)
def test_product_formula(prof, x, y):
    meas = convolve(x, y, prof, 40000, 5)
    lams = [(2,), (4,)] if prof.q == 1 else [(2, 0), (2, 2), (4, 2)]
    for lam in lams:
        rep = product_formula_check(lam, x, y, prof, 0, measure=meas)
        assert rep.z_score < 5, rep
        poly = jacobi_polynomial(lam, prof)
        assert rep.lhs == pytest.approx(poly(np.array(x)) * poly(np.array(y)))


def test_associativity_small():
    prof = RankProfile(1, 2, 2.7)
    f = jacobi_polynomial((2,), prof)
    rep = associativity_check([1.0], [0.5], [1.3], f, prof, 50, 500, 4, n_batches=10)
    assert rep.z_score < 4
    assert rep.std_error > 0


def test_haar_rejects_trivial_weight():
    prof = RankProfile(1, 2, 2)
    with pytest.raises(ValueError):
        haar_check((0,), [0.5], prof, get_grid(1, 16), 10, 0)


def test_haar_at_origin_is_deterministic():
    prof = RankProfile(2, 2, 4)
    rep = haar_check((2, 0), [0.0, 0.0], prof, get_grid(2, 32), 10, 0)
    assert rep.std_error == 0 and rep.residual < 1e-10


def test_haar_small():
    prof = RankProfile(1, 2, 2.7)
    grid = get_grid(1, 16)
    rep = haar_check((2,), [0.8], prof, grid, 2000, 6)
    assert rep.residual < 5 * rep.std_error + 1e-12


def test_fourier_of_character_is_norm():
    prof = RankProfile(2, 1, 2.2)
    grid = get_grid(2, 64)
    poly = jacobi_polynomial((4, 2), prof)
    hat = fourier_transform(poly, [(4, 2), (2, 2), (0, 0)], prof, grid)
    vals = list(hat.values())
    assert vals[0] == pytest.approx(poly.norm_sq, rel=1e-10)
    assert abs(vals[1]) < 1e-10 and abs(vals[2]) < 1e-10


def test_plancherel_worked_instance():
    rep = plancherel_check({(2,): 1.0}, RankProfile(1, 2, 2), get_grid(1, 64))
    assert rep.lhs == pytest.approx(0.5, abs=1e-12)
    assert rep.rhs == pytest.approx(0.5, abs=1e-12)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4))
@settings(max_examples=15, deadline=None)
def test_plancherel_random(coeffs):
    prof = RankProfile(2, 2, 4.6)
    lams = [(0, 0), (2, 0), (2, 2), (4, 0)][: len(coeffs)]
    rep = plancherel_check(dict(zip(lams, coeffs)), prof, get_grid(2, 64))
    assert rep.residual <= 1e-6 * max(1.0, rep.lhs)


def test_expansion_evaluates_sum():
    prof = RankProfile(1, 2, 2)
    f = expansion({(0,): 2.0, (2,): -1.0}, prof)
    x = np.array([[0.0], [HALF_PI]])
    np.testing.assert_allclose(f(x), [2 - 1, 2 + 0.5])


def test_involution_is_identity():
    assert involution_probe([0.9], RankProfile(1, 2, 2), 20000, 1) < 0.05
