"""Kernel principal component analysis.

Fitting solves the eigenproblem of the double-centered Gram matrix of the
training set; each retained eigenvector is scaled so the corresponding
feature-space axis has unit norm (alpha^T K' alpha = 1).  Projection of a new
point evaluates its kernel row against the training set, applies the matching
centering using statistics stored at fit time, and contracts with the scaled
eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NumericalError
from .kernels import KernelSpec, center_gram, kernel_matrix

__all__ = ["KpcaModel", "kpca_fit", "kpca_project", "kpca_transform"]

# relative cutoff below which trailing eigenvalues are treated as null space
_EIG_DROP = 1e-10


@dataclass
class KpcaModel:
    """Fitted KPCA state: everything needed to project new points."""

    kernel: KernelSpec
    training_matrix: np.ndarray  # (P, M)
    alphas: np.ndarray           # (P, n), column k scaled so alpha_k' K' alpha_k = 1
    eigenvalues: np.ndarray      # (n,) descending eigenvalues of the centered Gram
    gram_row_means: np.ndarray   # (P,) row means of the uncentered training Gram
    gram_grand_mean: float
    n_components: int            # retained count (may be below the requested n)
    training_scores: np.ndarray  # (P, n) projections of the training rows

    def to_json_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_json_dict(),
            "training_matrix": self.training_matrix.tolist(),
            "alphas": self.alphas.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "gram_row_means": self.gram_row_means.tolist(),
            "gram_grand_mean": self.gram_grand_mean,
            "n_components": self.n_components,
        }

    @staticmethod
    def from_json_dict(d) -> "KpcaModel":
        model = KpcaModel(
            kernel=KernelSpec.from_json_dict(d["kernel"]),
            training_matrix=np.asarray(d["training_matrix"], dtype=np.float64),
            alphas=np.asarray(d["alphas"], dtype=np.float64),
            eigenvalues=np.asarray(d["eigenvalues"], dtype=np.float64),
            gram_row_means=np.asarray(d["gram_row_means"], dtype=np.float64),
            gram_grand_mean=float(d["gram_grand_mean"]),
            n_components=int(d["n_components"]),
            training_scores=np.empty((0, 0)),
        )
        model.training_scores = kpca_transform(model, model.training_matrix)
        return model


def kpca_fit(X, kernel: KernelSpec, n_components: int) -> KpcaModel:
    """Fit KPCA on the rows of X, retaining up to n_components components.

    Components whose centered-Gram eigenvalue falls below 1e-10 of the
    largest are dropped; the model records the count actually kept.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError(f"need a 2-D matrix with at least 2 rows, got shape {X.shape}")
    if n_components < 1:
        raise ValueError(f"n_components must be >= 1, got {n_components}")
    P = X.shape[0]
    if n_components > P:
        raise ValueError(f"n_components {n_components} exceeds sample count {P}")

    K = kernel_matrix(kernel, X)
    row_means = K.mean(axis=0)
    grand_mean = float(row_means.mean())
    Kc = center_gram(K)

    eigvals, eigvecs = scipy.linalg.eigh(Kc)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]

    lam_max = float(eigvals[0])
    scale = P * max(float(np.abs(Kc).max()), np.finfo(np.float64).tiny)
    if lam_max <= 1e-14 * scale:
        raise NumericalError(
            "centered Gram matrix is numerically zero (identical training rows?)"
        )
    n_keep = min(n_components, int(np.count_nonzero(eigvals >= _EIG_DROP * lam_max)))
    lam = eigvals[:n_keep].copy()
    alphas = eigvecs[:, :n_keep] / np.sqrt(lam)[None, :]
    scores = Kc @ alphas
    return KpcaModel(kernel, X.copy(), alphas, lam, row_means, grand_mean,
                     n_keep, scores)


def kpca_transform(model: KpcaModel, X_new) -> np.ndarray:
    """Project the rows of X_new; returns (Q, n_components) scores."""
    X_new = np.ascontiguousarray(X_new, dtype=np.float64)
    if X_new.ndim != 2 or X_new.shape[1] != model.training_matrix.shape[1]:
        raise ValueError(
            f"expected shape (*, {model.training_matrix.shape[1]}), got {X_new.shape}"
        )
    Kx = kernel_matrix(model.kernel, X_new, model.training_matrix)
    Kx_centered = (Kx - Kx.mean(axis=1, keepdims=True)
                   - model.gram_row_means[None, :] + model.gram_grand_mean)
    return Kx_centered @ model.alphas


def kpca_project(model: KpcaModel, x) -> np.ndarray:
    """Project a single vector; returns its n_components-length score."""
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a vector")
    return kpca_transform(model, x[None, :])[0]
