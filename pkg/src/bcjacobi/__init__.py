"""Jacobi polynomials of type BC and the hypergroup convolution on the alcove.

Quick start::

    from bcjacobi import RankProfile, jacobi_polynomial, convolve

    prof = RankProfile(q=2, d=2, mu=4.6)
    R = jacobi_polynomial((4, 2), prof)
    meas = convolve([1.0, 0.4], [0.8, 0.3], prof, n_samples=50_000, rng=1)
    meas.expect(R)          # close to R([1.0, 0.4]) * R([0.8, 0.3])
"""

__version__ = "0.1.0"

from .errors import (
    BCJacobiError,
    GammaPole,
    IllConditioned,
    NegativeEigenvalue,
    NonConvergence,
    RejectionBudgetExceeded,
    SpectrumOutOfRange,
)
from .hypergroup import (
    EmpiricalMeasure,
    KernelSamples,
    associativity_check,
    convolve,
    draw_kernel_samples,
    fourier_transform,
    haar_check,
    plancherel_check,
    product_formula_check,
)
from .jacobi import JacobiPolynomial, c_function, eval_R, gram_schmidt, jacobi_polynomial, orbit_sum
from .matrices import (
    MatrixF,
    Quaternion,
    delta_det,
    estimate_kappa,
    kernel_d,
    sample_ball_uniform,
    sample_haar_unitary,
    spec_s,
)
from .quadrature import QuadratureGrid, build_grid, inner_product, weight_w_m
from .rank1 import ClassicalJacobiParams, classical_R, koornwinder_product, rank1_param_map
from .roots import (
    DominantWeight,
    RankProfile,
    RootData,
    dominance_leq,
    lower_set,
    positive_roots,
    rho,
    weyl_group,
    weyl_orbit,
)

__all__ = [
    "BCJacobiError", "GammaPole", "IllConditioned", "NegativeEigenvalue", "NonConvergence",
    "RejectionBudgetExceeded", "SpectrumOutOfRange",
    "EmpiricalMeasure", "KernelSamples", "associativity_check", "convolve", "draw_kernel_samples",
    "fourier_transform", "haar_check", "plancherel_check", "product_formula_check",
    "JacobiPolynomial", "c_function", "eval_R", "gram_schmidt", "jacobi_polynomial", "orbit_sum",
    "MatrixF", "Quaternion", "delta_det", "estimate_kappa", "kernel_d", "sample_ball_uniform",
    "sample_haar_unitary", "spec_s",
    "QuadratureGrid", "build_grid", "inner_product", "weight_w_m",
    "ClassicalJacobiParams", "classical_R", "koornwinder_product", "rank1_param_map",
    "DominantWeight", "RankProfile", "RootData", "dominance_leq", "lower_set", "positive_roots", "rho",
    "weyl_group", "weyl_orbit",
]
