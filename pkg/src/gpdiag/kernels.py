"""Feature-space kernel functions and Gram-matrix utilities.

The kernel pool covers linear, gaussian, polynomial, sigmoid and exponential
forms.  Matrix construction dispatches to the compiled backend when present.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend

__all__ = [
    "KernelSpec",
    "KERNEL_KINDS",
    "kernel_eval",
    "kernel_matrix",
    "center_gram",
    "median_pairwise_distance",
]

KERNEL_KINDS = ("linear", "gaussian", "polynomial", "sigmoid", "exponential")

_KIND_CODE = {
    "linear": _backend.KER_LINEAR,
    "gaussian": _backend.KER_GAUSSIAN,
    "polynomial": _backend.KER_POLYNOMIAL,
    "sigmoid": _backend.KER_SIGMOID,
    "exponential": _backend.KER_EXPONENTIAL,
}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameters.

    sigma is the gaussian/exponential width; a and b are the polynomial
    shift/degree or the sigmoid slope/offset.
    """

    kind: str
    sigma: float = 1.0
    a: float = 1.0
    b: float = 3.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        if self.kind in ("gaussian", "exponential") and not self.sigma > 0:
            raise ValueError(f"{self.kind} kernel needs sigma > 0, got {self.sigma}")
        if self.kind == "polynomial" and self.b < 1:
            raise ValueError(f"polynomial kernel needs degree b >= 1, got {self.b}")

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma, "a": self.a, "b": self.b}

    @staticmethod
    def from_json_dict(d) -> "KernelSpec":
        return KernelSpec(str(d["kind"]), float(d["sigma"]), float(d["a"]), float(d["b"]))


def _as_matrix(x, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def kernel_matrix(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Kernel matrix K[i, j] = kappa(X[i], Y[j]); Y=None means K(X, X).

    The X-vs-X case is exactly symmetric.
    """
    X = _as_matrix(X, "X")
    symmetric = Y is None
    Ym = X if symmetric else _as_matrix(Y, "Y")
    if X.shape[1] != Ym.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Ym.shape[1]}")
    return _backend.kernel_matrix(_KIND_CODE[spec.kind], X, Ym,
                                  spec.sigma, spec.a, spec.b, symmetric)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """kappa(x, y) for a single pair of equal-length vectors."""
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    y = np.ascontiguousarray(np.atleast_1d(y), dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be equal-length vectors, got {x.shape} vs {y.shape}")
    return float(kernel_matrix(spec, x[None, :], y[None, :])[0, 0])


def center_gram(K) -> np.ndarray:
    """Double-center a square kernel matrix.

    Equivalent to K - J K - K J + J K J with J the all-(1/P) matrix; rows and
    columns of the result sum to ~0 and the operation is idempotent.  The
    output is made exactly symmetric.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"gram matrix must be square, got shape {K.shape}")
    col_means = K.mean(axis=0)
    grand = col_means.mean()
    Kc = K - col_means[None, :] - col_means[:, None] + grand
    return 0.5 * (Kc + Kc.T)


def median_pairwise_distance(X) -> float:
    """Median Euclidean distance over all point pairs (the median heuristic).

    Falls back to 1.0 when all points coincide.
    """
    X = _as_matrix(X, "X")
    n = X.shape[0]
    if n < 2:
        return 1.0
    sq = np.einsum("ij,ij->i", X, X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    iu = np.triu_indices(n, k=1)
    med = float(np.sqrt(np.median(d2[iu])))
    return med if med > 0 else 1.0
