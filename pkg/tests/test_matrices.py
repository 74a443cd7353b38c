import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from bcjacobi.errors import NegativeEigenvalue, RejectionBudgetExceeded, SpectrumOutOfRange
from bcjacobi.hypergroup import draw_kernel_samples
from bcjacobi.matrices import (
    MatrixF,
    Quaternion,
    chi_embedding,
    delta_det,
    estimate_kappa,
    from_chi,
    jacobi_singular_values,
    kernel_d,
    log_delta,
    make_rng,
    sample_ball,
    sample_haar_unitary,
    spec_s,
)
from bcjacobi.quadrature import in_alcove
from bcjacobi.roots import RankProfile

from oracles import quaternion_product, quaternion_real_matrix

finite = st.floats(-3, 3, allow_nan=False)


def random_h(rng, q, n=None):
    shape = (2, q, q) if n is None else (n, 2, q, q)
    return MatrixF("H", rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def h_components(m):
    """``(4, q, q)`` real components ``w + x i + y j + z k`` of an H-matrix."""
    a1, a2 = m.data
    return np.stack([a1.real, a1.imag, a2.real, a2.imag])


@given(st.tuples(finite, finite, finite, finite), st.tuples(finite, finite, finite, finite))
def test_quaternion_product(a, b):
    got = Quaternion(*a) * Quaternion(*b)
    np.testing.assert_allclose([got.a, got.b, got.c, got.d], quaternion_product(a, b), atol=1e-12)
    assert abs(got) == pytest.approx(abs(Quaternion(*a)) * abs(Quaternion(*b)), rel=1e-9, abs=1e-12)


def test_quaternion_units():
    i, j, k = Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1)
    assert i * j == k and j * i == -k
    assert i * i == Quaternion(-1)


def test_h_matmul_matches_real_representation():
    rng = make_rng(0)
    a, b = random_h(rng, 3), random_h(rng, 3)
    c = a @ b
    lhs = quaternion_real_matrix(h_components(c))
    rhs = quaternion_real_matrix(h_components(a)) @ quaternion_real_matrix(h_components(b))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_h_matmul_matches_entrywise_quaternions():
    rng = make_rng(1)
    a, b = random_h(rng, 2), random_h(rng, 2)
    qa, qb, qc = a.to_quaternions(), b.to_quaternions(), (a @ b).to_quaternions()
    for i in range(2):
        for k in range(2):
            s = qa[i][0] * qb[0][k] + qa[i][1] * qb[1][k]
            assert abs(s - qc[i][k]) < 1e-12


def test_chi_is_multiplicative_and_invertible():
    rng = make_rng(2)
    a, b = random_h(rng, 3, 4), random_h(rng, 3, 4)
    np.testing.assert_allclose(chi_embedding(a @ b), chi_embedding(a) @ chi_embedding(b), atol=1e-12)
    np.testing.assert_array_equal(from_chi(chi_embedding(a)).data, a.data)
    np.testing.assert_allclose(chi_embedding(a.adjoint()), np.conj(np.swapaxes(chi_embedding(a), -1, -2)))


def test_h_adjoint_reverses_products():
    rng = make_rng(3)
    a, b = random_h(rng, 3), random_h(rng, 3)
    np.testing.assert_allclose((a @ b).adjoint().data, (b.adjoint() @ a.adjoint()).data, atol=1e-12)


@pytest.mark.parametrize("complex_", [False, True])
@pytest.mark.parametrize("q", [1, 2, 3, 5])
def test_jacobi_svd_matches_lapack(q, complex_):
    rng = make_rng(q)
    x = rng.standard_normal((50, q, q))
    if complex_:
        x = x + 1j * rng.standard_normal((50, q, q))
    np.testing.assert_allclose(jacobi_singular_values(x), np.linalg.svd(x, compute_uv=False), atol=1e-13)


def test_spec_s_quaternion_against_real_representation():
    rng = make_rng(4)
    a = random_h(rng, 3)
    sv = np.linalg.svd(quaternion_real_matrix(h_components(a)), compute_uv=False)
    np.testing.assert_allclose(spec_s(a), sv[::4], atol=1e-12)


def test_spec_s_rank_deficient():
    x = np.array([[1.0, 2.0], [2.0, 4.0]])
    np.testing.assert_allclose(spec_s(x), [5.0, 0.0], atol=1e-14)


@pytest.mark.parametrize("field", ["R", "C", "H"])
def test_log_delta(field):
    rng = make_rng(5)
    if field == "H":
        b = random_h(rng, 3)
        ref = math.log(abs(np.linalg.det(chi_embedding(b)))) / 2
    else:
        b = MatrixF.from_complex(rng.standard_normal((3, 3)) + (1j * rng.standard_normal((3, 3)) if field == "C" else 0), field)
        ref = math.log(abs(np.linalg.det(b.data)))
    gram = b.adjoint() @ b
    # Delta(B* B) = |Delta(B)|^2
    assert log_delta(gram) == pytest.approx(2 * ref, rel=1e-10)
    assert delta_det(gram, 0.5) == pytest.approx(math.exp(ref), rel=1e-10)


def test_log_delta_rejects_indefinite():
    with pytest.raises(NegativeEigenvalue):
        log_delta(MatrixF("R", np.diag([1.0, -0.5])))


@pytest.mark.parametrize("d", [1, 2, 4])
@pytest.mark.parametrize("q", [1, 2, 3])
def test_haar_unitary(q, d):
    prof = RankProfile(q, d, d * q + 1)
    u = sample_haar_unitary(prof, make_rng(6), size=200)
    eye = (u.adjoint() @ u).as_complex()
    np.testing.assert_allclose(eye, np.broadcast_to(np.eye(eye.shape[-1]), eye.shape), atol=1e-12)
    if d == 1:
        np.testing.assert_allclose(np.linalg.det(u.data), 1.0)


@pytest.mark.parametrize("d", [1, 2, 4])
def test_haar_entry_second_moment(d):
    # E |u_11|^2 = 1/q for Haar measure on the unitary group of F^q
    q = 3
    prof = RankProfile(q, d, d * q + 1)
    u = sample_haar_unitary(prof, make_rng(7), size=20000)
    if d == 4:
        mod2 = np.abs(u.data[:, 0, 0, 0]) ** 2 + np.abs(u.data[:, 1, 0, 0]) ** 2
    else:
        mod2 = np.abs(u.data[:, 0, 0]) ** 2
    assert mod2.mean() == pytest.approx(1 / q, abs=5 * mod2.std() / math.sqrt(len(mod2)))


@pytest.mark.parametrize("d,rate", [(1, 1.0), (2, math.pi / 4), (4, math.pi**2 / 32)])
def test_ball_acceptance_rank_one(d, rate):
    prof = RankProfile(1, d, d + 1)
    res = sample_ball(prof, 20000, make_rng(8))
    p = res.acceptance_rate
    assert abs(p - rate) < 5 * math.sqrt(rate * (1 - rate) / res.n_draws) + 1e-12
    assert np.all(spec_s(res.w)[:, 0] < 1)


def test_ball_floor():
    with pytest.raises(RejectionBudgetExceeded):
        sample_ball(RankProfile(2, 4, 8), 100, make_rng(9), acceptance_floor=1e-3)


def kappa_rank_one(d, e):
    return math.exp(d / 2 * math.log(math.pi) + gammaln(e) - gammaln(e + d / 2))


@pytest.mark.parametrize("d,mu", [(1, 1.5), (1, 2.5), (2, 2.0), (4, 4.0)])
def test_kappa_rank_one(d, mu):
    prof = RankProfile(1, d, mu)
    est, se = estimate_kappa(prof, 200000, make_rng(10))
    ref = kappa_rank_one(d, mu - prof.gamma + 1)
    assert abs(est - ref) <= 4 * se + 1e-12


@pytest.mark.parametrize("d", [1, 2, 4])
def test_kernel_in_alcove(d):
    prof = RankProfile(2, d, 2 * d + 1)
    rng = make_rng(11)
    s = draw_kernel_samples(prof, 500, rng)
    z = kernel_d(np.array([1.2, 0.3]), np.array([0.9, 0.5]), s.v, s.w)
    assert np.all(in_alcove(z))


def test_kernel_identity_and_zero_ball():
    x, y = np.array([1.0, 0.4]), np.array([0.3, 0.2])
    eye = MatrixF.identity(2, "C")
    zero = MatrixF.from_complex(np.zeros((2, 2)), "C")
    expected = np.sort(np.arccos(np.cos(x) * np.cos(y)))[::-1]
    np.testing.assert_allclose(kernel_d(x, y, eye, zero), expected, atol=1e-12)
    np.testing.assert_allclose(kernel_d(x, np.zeros(2), eye, zero), x, atol=1e-7)


def test_kernel_rejects_outside_ball():
    eye = MatrixF.identity(1, "R")
    with pytest.raises(SpectrumOutOfRange):
        kernel_d(np.array([1.0]), np.array([1.0]), eye, MatrixF("R", np.array([[-3.0]])))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_seeded_determinism(seed):
    prof = RankProfile(2, 2, 4)
    a = sample_haar_unitary(prof, make_rng(seed), 3).data
    b = sample_haar_unitary(prof, make_rng(seed), 3).data
    np.testing.assert_array_equal(a, b)
