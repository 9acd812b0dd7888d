"""Binary Gaussian process classifier with a Laplace posterior approximation.

The latent posterior under a logistic or probit likelihood is non-Gaussian;
it is replaced by a Gaussian centered at the posterior mode with curvature
matched there.  The mode is found by damped Newton ascent on

    Psi(f) = log p(y | f) - 0.5 (f - m)^T K^{-1} (f - m)  + const,

using the numerically stable parametrization a = K^{-1}(f - m) and the
factor B = I + W^{1/2} K W^{1/2}, so no explicit inverse of K is formed.
The same factorization yields the approximate log marginal likelihood used
for hyperparameter selection and the latent predictive moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .covariance import CovarianceSpec, cov_matrix
from .exceptions import NumericalError
from .likelihoods import LikelihoodSpec, log_likelihood_terms, predictive_from_latent

__all__ = ["MeanSpec", "LaplacePosterior", "BinaryGpcModel", "laplace_fit",
           "log_marginal_likelihood"]

MEAN_KINDS = ("zero", "constant")

GRAD_TOL = 1e-6
MAX_NEWTON_ITER = 100
JITTER_START_FACTOR = 1e-8
JITTER_MAX_FACTOR = 1e-2


@dataclass(frozen=True)
class MeanSpec:
    """Latent mean function: identically zero or a trainable constant."""

    kind: str = "constant"
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in MEAN_KINDS:
            raise ValueError(f"unknown mean kind {self.kind!r}; expected one of {MEAN_KINDS}")
        if not np.isfinite(self.c):
            raise ValueError("mean constant must be finite")

    def value(self) -> float:
        return self.c if self.kind == "constant" else 0.0

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "c": self.c}

    @staticmethod
    def from_json_dict(d) -> "MeanSpec":
        return MeanSpec(str(d["kind"]), float(d["c"]))


@dataclass
class LaplacePosterior:
    """Gaussian approximation of the latent posterior at its mode.

    mode is the latent maximizer f_hat; hessian_w the per-point negative
    second derivative of the log likelihood there; cholesky_b the lower
    factor of B = I + W^{1/2} K W^{1/2}; alpha solves K alpha = f_hat - m
    and doubles as the log-likelihood gradient at the mode.
    """

    mode: np.ndarray
    hessian_w: np.ndarray
    cholesky_b: np.ndarray
    log_marginal: float
    alpha: np.ndarray
    grad_max: float
    n_iterations: int
    psi_history: np.ndarray
    jitter_used: float


def _mean_vector(mean: MeanSpec, n: int) -> np.ndarray:
    return np.full(n, mean.value())


def _add_diag(A: np.ndarray, value: float) -> np.ndarray:
    out = A.copy()
    out.flat[:: A.shape[0] + 1] += value
    return out


def _chol_with_jitter(K: np.ndarray) -> tuple[float, np.ndarray]:
    """Find the smallest jitter (escalating x10) making K + jI factorizable."""
    diag_mean = float(np.mean(np.diag(K)))
    if not np.isfinite(diag_mean) or diag_mean <= 0:
        raise NumericalError(f"covariance diagonal is degenerate (mean {diag_mean})")
    jitter = JITTER_START_FACTOR * diag_mean
    max_jitter = JITTER_MAX_FACTOR * diag_mean
    while True:
        Kj = _add_diag(K, jitter)
        try:
            scipy.linalg.cholesky(Kj, lower=True, check_finite=False)
            return jitter, Kj
        except scipy.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > max_jitter * (1.0 + 1e-12):
                raise NumericalError(
                    f"covariance not positive definite even with jitter "
                    f"{jitter / 10.0:.3e} (cap {max_jitter:.3e})"
                ) from None


def laplace_fit(train_x, train_y, cov: CovarianceSpec, mean: MeanSpec,
                lik: LikelihoodSpec, *, max_iter: int = MAX_NEWTON_ITER,
                grad_tol: float = GRAD_TOL) -> LaplacePosterior:
    """Locate the latent posterior mode and assemble the Laplace posterior.

    Newton steps are damped by backtracking so the objective Psi never
    decreases; convergence requires the max-norm of its gradient to fall
    below grad_tol.  Raises NumericalError on factorization failure beyond
    the jitter cap or on non-convergence.
    """
    X = np.ascontiguousarray(train_x, dtype=np.float64)
    y = np.ascontiguousarray(train_y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"train_x must be a nonempty 2-D matrix, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError("train_y length must match train_x rows")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("labels must be +1 or -1")
    P = X.shape[0]

    K = cov_matrix(cov, X)
    jitter, Kj = _chol_with_jitter(K)
    m = _mean_vector(mean, P)

    f = m.copy()
    a = np.zeros(P)
    logp, g, h = log_likelihood_terms(lik, f, y)
    psi = float(logp.sum())
    psis = [psi]

    grad_max = float(np.max(np.abs(g - a)))
    it = 0
    while grad_max > grad_tol and it < max_iter:
        it += 1
        W = np.maximum(-h, 0.0)
        sW = np.sqrt(W)
        B = _add_diag(sW[:, None] * Kj * sW[None, :], 1.0)
        try:
            L = scipy.linalg.cholesky(B, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError:
            raise NumericalError(
                f"Cholesky of the Newton system failed at iteration {it} "
                f"(jitter {jitter:.3e})"
            ) from None
        b = W * (f - m) + g
        v = scipy.linalg.solve_triangular(L, sW * (Kj @ b), lower=True,
                                          check_finite=False)
        a_new = b - sW * scipy.linalg.solve_triangular(L.T, v, lower=False,
                                                       check_finite=False)
        da = a_new - a

        # backtrack until Psi does not decrease (Newton direction is ascent)
        step = 1.0
        improved = False
        for _ in range(30):
            a_t = a + step * da
            f_t = m + Kj @ a_t
            lp_t = log_likelihood_terms(lik, f_t, y)[0].sum()
            psi_t = float(lp_t) - 0.5 * float(a_t @ (f_t - m))
            if np.isfinite(psi_t) and psi_t >= psi - 1e-12 * (1.0 + abs(psi)):
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        a, f, psi = a_t, f_t, psi_t
        psis.append(psi)
        logp, g, h = log_likelihood_terms(lik, f, y)
        grad_max = float(np.max(np.abs(g - a)))

    if grad_max > grad_tol:
        raise NumericalError(
            f"Newton iteration did not converge: max gradient {grad_max:.3e} "
            f"after {it} iterations (tolerance {grad_tol:.1e})"
        )

    W = np.maximum(-h, 0.0)
    sW = np.sqrt(W)
    B = _add_diag(sW[:, None] * Kj * sW[None, :], 1.0)
    L = scipy.linalg.cholesky(B, lower=True, check_finite=False)
    lml = (-0.5 * float(a @ (f - m)) + float(logp.sum())
           - float(np.log(np.diag(L)).sum()))
    return LaplacePosterior(mode=f, hessian_w=W, cholesky_b=L, log_marginal=lml,
                            alpha=a, grad_max=grad_max, n_iterations=it,
                            psi_history=np.asarray(psis), jitter_used=jitter)


@dataclass
class BinaryGpcModel:
    """A fitted binary classifier: data, specs, and the Laplace posterior."""

    train_x: np.ndarray
    train_y: np.ndarray
    cov: CovarianceSpec
    mean: MeanSpec
    lik: LikelihoodSpec
    posterior: LaplacePosterior
    jitter_used: float

    @classmethod
    def fit(cls, train_x, train_y, cov: CovarianceSpec,
            mean: MeanSpec = MeanSpec("zero"),
            lik: LikelihoodSpec = LikelihoodSpec("cumulative-gaussian")
            ) -> "BinaryGpcModel":
        X = np.ascontiguousarray(train_x, dtype=np.float64)
        y = np.ascontiguousarray(train_y, dtype=np.float64)
        post = laplace_fit(X, y, cov, mean, lik)
        return cls(X, y, cov, mean, lik, post, post.jitter_used)

    def log_marginal_likelihood(self) -> float:
        return self.posterior.log_marginal

    def predict_latent_batch(self, X_new) -> tuple[np.ndarray, np.ndarray]:
        """Laplace predictive latent mean and variance per row of X_new."""
        X_new = np.ascontiguousarray(X_new, dtype=np.float64)
        if X_new.ndim != 2 or X_new.shape[1] != self.train_x.shape[1]:
            raise ValueError(
                f"expected shape (*, {self.train_x.shape[1]}), got {X_new.shape}"
            )
        Ks = cov_matrix(self.cov, self.train_x, X_new)  # (P, Q)
        mu = self.mean.value() + Ks.T @ self.posterior.alpha
        sW = np.sqrt(self.posterior.hessian_w)
        V = scipy.linalg.solve_triangular(self.posterior.cholesky_b,
                                          sW[:, None] * Ks, lower=True)
        kss = self.cov.sigma_f ** 2
        var = kss - np.einsum("ij,ij->j", V, V)
        np.clip(var, 1e-12 * kss, kss, out=var)
        return mu, var

    def predict_latent(self, x) -> tuple[float, float]:
        x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
        mu, var = self.predict_latent_batch(x[None, :])
        return float(mu[0]), float(var[0])

    def predict_probability_batch(self, X_new) -> np.ndarray:
        mu, var = self.predict_latent_batch(X_new)
        return predictive_from_latent(self.lik, mu, var)

    def predict_probability(self, x, label: int = 1) -> float:
        """Posterior-mean probability of the given label (+1 by default)."""
        if label not in (1, -1):
            raise ValueError("label must be +1 or -1")
        x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
        p = float(self.predict_probability_batch(x[None, :])[0])
        return p if label == 1 else 1.0 - p

    def to_json_dict(self) -> dict:
        return {
            "cov": self.cov.to_json_dict(),
            "mean": self.mean.to_json_dict(),
            "lik": self.lik.kind,
            "train_x": self.train_x.tolist(),
            "train_y": self.train_y.tolist(),
            "mode": self.posterior.mode.tolist(),
            "alpha": self.posterior.alpha.tolist(),
            "hessian_w": self.posterior.hessian_w.tolist(),
            "log_marginal": self.posterior.log_marginal,
            "jitter_used": self.jitter_used,
        }

    @staticmethod
    def from_json_dict(d) -> "BinaryGpcModel":
        """Rebuild a model; factors are recomputed from the stored mode state."""
        cov = CovarianceSpec.from_json_dict(d["cov"])
        mean = MeanSpec.from_json_dict(d["mean"])
        lik = LikelihoodSpec(str(d["lik"]))
        X = np.asarray(d["train_x"], dtype=np.float64)
        W = np.asarray(d["hessian_w"], dtype=np.float64)
        jitter = float(d["jitter_used"])
        K = cov_matrix(cov, X)
        Kj = K + jitter * np.eye(X.shape[0])
        sW = np.sqrt(W)
        B = np.eye(X.shape[0]) + sW[:, None] * Kj * sW[None, :]
        L = scipy.linalg.cholesky(B, lower=True)
        post = LaplacePosterior(
            mode=np.asarray(d["mode"], dtype=np.float64),
            hessian_w=W,
            cholesky_b=L,
            log_marginal=float(d["log_marginal"]),
            alpha=np.asarray(d["alpha"], dtype=np.float64),
            grad_max=np.nan,
            n_iterations=0,
            psi_history=np.empty(0),
            jitter_used=jitter,
        )
        return BinaryGpcModel(X, np.asarray(d["train_y"], dtype=np.float64),
                              cov, mean, lik, post, jitter)


def log_marginal_likelihood(model: BinaryGpcModel) -> float:
    """Laplace-approximate log p(y | X, hyperparameters); always <= 0."""
    return model.log_marginal_likelihood()
