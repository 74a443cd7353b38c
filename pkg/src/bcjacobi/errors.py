"""Exception types raised by the numerical routines."""


class BCJacobiError(Exception):
    """Base class for all package errors."""


class IllConditioned(BCJacobiError):
    """Gram matrix too ill-conditioned for the requested quadrature order."""

    def __init__(self, condition_number, bound):
        self.condition_number = condition_number
        self.bound = bound
        super().__init__(
            f"Gram matrix condition number {condition_number:.3e} exceeds {bound:.3e}; "
            "increase the quadrature order"
        )


class GammaPole(BCJacobiError):
    """A Gamma-function argument of the c-function is not positive."""


class NonConvergence(BCJacobiError):
    """The Jacobi SVD sweep budget was exhausted."""


class NegativeEigenvalue(BCJacobiError):
    """A matrix expected to be positive semidefinite is not."""


class SpectrumOutOfRange(BCJacobiError):
    """A singular value exceeds 1 by more than rounding noise."""


class RejectionBudgetExceeded(BCJacobiError):
    """Rejection sampling acceptance rate fell below the configured floor."""
