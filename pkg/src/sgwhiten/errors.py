"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A linear-algebra step failed or fell outside its accuracy contract."""


class IllConditionedError(NumericalError):
    """Matrix inversion did not meet the residual bound.

    For narrow-band noise models this usually means the pole damping
    ``sigma`` is too close to zero; move it further into the left
    half-plane and retry.
    """


class NotPositiveDefiniteError(NumericalError):
    """A matrix required to be positive definite is not."""
