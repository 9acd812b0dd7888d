"""NumPy implementation of the pairwise kernel builders.

This is the reference backend: the compiled module must agree with it to
floating-point noise.  Squared distances use the (x^2 + y^2 - 2xy) expansion,
which is BLAS-bound; the compiled backend fuses distance and kernel into one
pass instead.
"""

import numpy as np


def _scaled_sqdist(X, Y, inv_ls, symmetric):
    """Pairwise squared distances after per-dimension scaling by inv_ls.

    For the symmetric case (Y is X) the result is made exactly symmetric
    with an exactly zero diagonal, so downstream eigendecompositions and
    k(x, x) evaluations are clean.
    """
    Xs = X * inv_ls
    x2 = np.einsum("ij,ij->i", Xs, Xs)
    if symmetric:
        Ys, y2 = Xs, x2
    else:
        Ys = Y * inv_ls
        y2 = np.einsum("ij,ij->i", Ys, Ys)
    d2 = x2[:, None] + y2[None, :] - 2.0 * (Xs @ Ys.T)
    np.maximum(d2, 0.0, out=d2)
    if symmetric:
        d2 = 0.5 * (d2 + d2.T)
        np.fill_diagonal(d2, 0.0)
    return d2


def cov_matrix(kind, X, Y, sigma_f, inv_ls, alpha, symmetric):
    """P x Q latent-process covariance matrix.

    kind selects squared-exponential / rational-quadratic / Matern 3/2 (see
    the package-level kind codes); inv_ls holds one reciprocal length scale
    per input dimension (an isotropic model passes a constant vector).
    """
    d2 = _scaled_sqdist(X, Y, inv_ls, symmetric)
    s2 = sigma_f * sigma_f
    if kind == 0:  # squared exponential
        K = s2 * np.exp(-0.5 * d2)
    elif kind == 1:  # rational quadratic, via exp/log1p for large-alpha stability
        K = s2 * np.exp(-alpha * np.log1p(d2 / (2.0 * alpha)))
    elif kind == 2:  # Matern 3/2
        t = np.sqrt(3.0 * d2)
        K = s2 * (1.0 + t) * np.exp(-t)
    else:
        raise ValueError(f"unknown covariance kind code {kind}")
    return K


def kernel_matrix(kind, X, Y, sigma, a, b, symmetric):
    """P x Q feature-space kernel matrix for KPCA.

    kind selects linear / gaussian / polynomial / sigmoid / exponential.
    """
    if kind in (0, 2, 3):  # dot-product family
        G = X @ Y.T
        if symmetric:
            G = 0.5 * (G + G.T)
        if kind == 0:
            return G
        if kind == 2:
            return np.power(G + a, b)
        return np.tanh(a * G + b)
    ones = np.ones(X.shape[1])
    d2 = _scaled_sqdist(X, Y, ones, symmetric)
    if kind == 1:
        return np.exp(-d2 / (2.0 * sigma * sigma))
    if kind == 4:
        return np.exp(-np.sqrt(d2) / sigma)
    raise ValueError(f"unknown kernel kind code {kind}")
