"""Covariance functions for the latent Gaussian process.

Squared-exponential, rational-quadratic and Matern 3/2 forms, each usable
isotropically or with one length scale per input dimension (automatic
relevance determination).  Matrix construction dispatches to the compiled
backend when present.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend

__all__ = ["COV_KINDS", "CovarianceSpec", "cov_eval", "cov_matrix"]

COV_KINDS = ("squared-exponential", "rational-quadratic", "matern-3/2")

_KIND_CODE = {
    "squared-exponential": _backend.COV_SQUARED_EXPONENTIAL,
    "rational-quadratic": _backend.COV_RATIONAL_QUADRATIC,
    "matern-3/2": _backend.COV_MATERN_32,
}


@dataclass(frozen=True)
class CovarianceSpec:
    """Covariance family plus hyperparameters.

    sigma_f is the signal standard deviation; sigma_l holds one length scale
    per input dimension when ard is set, otherwise a single shared scale.
    alpha_rq is the rational-quadratic shape parameter (required for that
    kind only).
    """

    kind: str
    ard: bool = False
    sigma_f: float = 1.0
    sigma_l: tuple[float, ...] = (1.0,)
    alpha_rq: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "sigma_l", tuple(float(v) for v in self.sigma_l))
        if self.kind not in COV_KINDS:
            raise ValueError(f"unknown covariance kind {self.kind!r}; expected one of {COV_KINDS}")
        if not self.sigma_f > 0:
            raise ValueError(f"sigma_f must be positive, got {self.sigma_f}")
        if not self.sigma_l or any(v <= 0 for v in self.sigma_l):
            raise ValueError("all length scales must be positive")
        if not self.ard and len(self.sigma_l) != 1:
            raise ValueError("isotropic covariance takes exactly one length scale")
        if self.kind == "rational-quadratic":
            if self.alpha_rq is None or not self.alpha_rq > 0:
                raise ValueError("rational-quadratic needs alpha_rq > 0")

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "ard": self.ard, "sigma_f": self.sigma_f,
                "sigma_l": list(self.sigma_l), "alpha_rq": self.alpha_rq}

    @staticmethod
    def from_json_dict(d) -> "CovarianceSpec":
        alpha = d.get("alpha_rq")
        return CovarianceSpec(str(d["kind"]), bool(d["ard"]), float(d["sigma_f"]),
                              tuple(d["sigma_l"]),
                              None if alpha is None else float(alpha))


def _inv_lengthscales(spec: CovarianceSpec, n_dims: int) -> np.ndarray:
    if spec.ard:
        if len(spec.sigma_l) != n_dims:
            raise ValueError(
                f"ARD needs {n_dims} length scales, got {len(spec.sigma_l)}"
            )
        return 1.0 / np.asarray(spec.sigma_l, dtype=np.float64)
    return np.full(n_dims, 1.0 / spec.sigma_l[0])


def cov_matrix(spec: CovarianceSpec, X, Y=None) -> np.ndarray:
    """Covariance matrix K[i, j] = k(X[i], Y[j]); Y=None means K(X, X).

    The X-vs-X case is exactly symmetric with diagonal sigma_f^2.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    symmetric = Y is None
    Ym = X if symmetric else np.ascontiguousarray(Y, dtype=np.float64)
    if Ym.ndim != 2 or X.shape[1] != Ym.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape} vs {Ym.shape}")
    inv_ls = _inv_lengthscales(spec, X.shape[1])
    alpha = spec.alpha_rq if spec.alpha_rq is not None else 1.0
    return _backend.cov_matrix(_KIND_CODE[spec.kind], X, Ym, spec.sigma_f,
                               inv_ls, alpha, symmetric)


def cov_eval(spec: CovarianceSpec, x, y) -> float:
    """k(x, y) for a single pair of equal-length vectors."""
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    y = np.ascontiguousarray(np.atleast_1d(y), dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be equal-length vectors, got {x.shape} vs {y.shape}")
    return float(cov_matrix(spec, x[None, :], y[None, :])[0, 0])
