"""Build script for the optional compiled kernel backend.

The extension accelerates the pairwise Gram/covariance builders that sit in
the inner loop of hyperparameter search.  It is marked optional: if the
compiler or Cython is unavailable the install still succeeds and the package
falls back to the NumPy implementation at import time.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "gpdiag._backend._ckernels",
        ["src/gpdiag/_backend/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
