"""Package exception types."""


class NumericalError(RuntimeError):
    """Numerical failure: factorization breakdown, divergence, non-convergence."""
