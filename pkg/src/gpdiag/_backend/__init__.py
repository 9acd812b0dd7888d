"""Pairwise kernel/covariance builders with a compiled fast path.

Two interchangeable implementations live here: ``_ckernels`` (Cython, fused
loops, built at install time) and ``_pykernels`` (pure NumPy).  The compiled
one is preferred when importable; set ``GPDIAG_FORCE_NUMPY=1`` to force the
NumPy path (used by the backend-equivalence tests and the benchmark).

Kind codes are shared by both implementations so the dispatch layer can pass
plain integers across the boundary.
"""

import os

# covariance kinds
COV_SQUARED_EXPONENTIAL = 0
COV_RATIONAL_QUADRATIC = 1
COV_MATERN_32 = 2

# feature-space kernel kinds
KER_LINEAR = 0
KER_GAUSSIAN = 1
KER_POLYNOMIAL = 2
KER_SIGMOID = 3
KER_EXPONENTIAL = 4

from . import _pykernels  # noqa: E402

if os.environ.get("GPDIAG_FORCE_NUMPY", "") == "1":
    _impl = _pykernels
    BACKEND = "numpy"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "numpy"

cov_matrix = _impl.cov_matrix
kernel_matrix = _impl.kernel_matrix


def backend_name() -> str:
    """Name of the implementation selected at import ("cython" or "numpy")."""
    return BACKEND
