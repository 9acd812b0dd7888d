"""Hyperparameter selection by multi-start Nelder-Mead on the Laplace evidence.

The search runs in log space for all scale parameters (signal std, length
scales, rational-quadratic shape) with the mean constant handled linearly.
The first start uses unit signal std, the median-distance heuristic for
length scales and a zero mean; remaining starts are drawn uniformly inside
the box.  Everything is deterministic for a given seed.
"""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

try:  # BLAS thread pools hurt badly on the small repeated factorizations here
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    def threadpool_limits(*_args, **_kwargs):
        return nullcontext()

from .covariance import COV_KINDS, CovarianceSpec
from .exceptions import NumericalError
from .kernels import median_pairwise_distance
from .laplace import MEAN_KINDS, BinaryGpcModel, MeanSpec
from .likelihoods import LIKELIHOOD_KINDS, LikelihoodSpec

__all__ = ["GpcConfig", "optimize_hyperparams", "LOG_BOUND", "MEAN_BOUND"]

LOG_BOUND = 5.0   # log-parameters searched in [-5, 5]
MEAN_BOUND = 3.0  # mean constant searched in [-3, 3]

_PENALTY = 1e12   # objective value standing in for failed evaluations


@dataclass(frozen=True)
class GpcConfig:
    """Model family and search budget for one binary classifier."""

    cov_kind: str = "matern-3/2"
    ard: bool = True
    mean_kind: str = "constant"
    likelihood: str = "cumulative-gaussian"
    budget: int = 200
    n_restarts: int = 3

    def __post_init__(self):
        if self.cov_kind not in COV_KINDS:
            raise ValueError(f"unknown covariance kind {self.cov_kind!r}")
        if self.mean_kind not in MEAN_KINDS:
            raise ValueError(f"unknown mean kind {self.mean_kind!r}")
        if self.likelihood not in LIKELIHOOD_KINDS:
            raise ValueError(f"unknown likelihood {self.likelihood!r}")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")

    def to_json_dict(self) -> dict:
        return {"cov_kind": self.cov_kind, "ard": self.ard,
                "mean_kind": self.mean_kind, "likelihood": self.likelihood,
                "budget": self.budget, "n_restarts": self.n_restarts}

    @staticmethod
    def from_json_dict(d) -> "GpcConfig":
        return GpcConfig(
            cov_kind=str(d.get("cov_kind", "matern-3/2")),
            ard=bool(d.get("ard", True)),
            mean_kind=str(d.get("mean_kind", "constant")),
            likelihood=str(d.get("likelihood", "cumulative-gaussian")),
            budget=int(d.get("budget", 200)),
            n_restarts=int(d.get("n_restarts", 3)),
        )


def _theta_layout(config: GpcConfig, n_dims: int):
    n_ls = n_dims if config.ard else 1
    has_alpha = config.cov_kind == "rational-quadratic"
    has_c = config.mean_kind == "constant"
    return n_ls, has_alpha, has_c


def _theta_to_specs(theta, config: GpcConfig, n_dims: int):
    n_ls, has_alpha, has_c = _theta_layout(config, n_dims)
    sigma_f = float(np.exp(theta[0]))
    sigma_l = tuple(np.exp(theta[1:1 + n_ls]))
    pos = 1 + n_ls
    alpha_rq = None
    if has_alpha:
        alpha_rq = float(np.exp(theta[pos]))
        pos += 1
    c = float(theta[pos]) if has_c else 0.0
    cov = CovarianceSpec(config.cov_kind, ard=config.ard, sigma_f=sigma_f,
                         sigma_l=sigma_l, alpha_rq=alpha_rq)
    mean = MeanSpec(config.mean_kind, c)
    return cov, mean


def optimize_hyperparams(train_x, train_y, config: GpcConfig = GpcConfig(),
                         seed: int = 0) -> BinaryGpcModel:
    """Fit a binary GPC with evidence-maximized hyperparameters.

    Runs config.n_restarts independent Nelder-Mead searches, each capped at
    config.budget objective evaluations, and refits the model at the best
    point found.  Raises NumericalError if every start fails numerically.
    """
    X = np.ascontiguousarray(train_x, dtype=np.float64)
    y = np.ascontiguousarray(train_y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least 2 training points")
    if y.shape != (X.shape[0],):
        raise ValueError("train_y length must match train_x rows")
    labels = set(np.unique(y))
    if labels != {-1.0, 1.0}:
        raise ValueError(f"both labels must be present, got {sorted(labels)}")

    n_dims = X.shape[1]
    n_ls, has_alpha, has_c = _theta_layout(config, n_dims)
    dim = 1 + n_ls + int(has_alpha) + int(has_c)
    bounds = [(-LOG_BOUND, LOG_BOUND)] * (1 + n_ls + int(has_alpha))
    if has_c:
        bounds.append((-MEAN_BOUND, MEAN_BOUND))
    lows = np.array([b[0] for b in bounds])
    highs = np.array([b[1] for b in bounds])

    lik = LikelihoodSpec(config.likelihood)

    def objective(theta):
        try:
            cov, mean = _theta_to_specs(theta, config, n_dims)
            model = BinaryGpcModel.fit(X, y, cov, mean, lik)
        except (NumericalError, np.linalg.LinAlgError, ValueError):
            return _PENALTY
        lml = model.log_marginal_likelihood()
        return -lml if np.isfinite(lml) else _PENALTY

    log_med = float(np.clip(np.log(median_pairwise_distance(X)),
                            -LOG_BOUND, LOG_BOUND))
    first = np.zeros(dim)
    first[1:1 + n_ls] = log_med
    starts = [first]
    rng = np.random.default_rng(seed)
    for _ in range(config.n_restarts - 1):
        starts.append(rng.uniform(lows, highs))

    best_theta = None
    best_val = np.inf
    with threadpool_limits(limits=1):
        for x0 in starts:
            res = minimize(objective, x0, method="Nelder-Mead", bounds=bounds,
                           options={"maxfev": config.budget, "xatol": 1e-3,
                                    "fatol": 1e-5, "maxiter": 100 * config.budget})
            if res.fun < best_val:
                best_val = float(res.fun)
                best_theta = np.asarray(res.x)

    if best_theta is None or best_val >= _PENALTY * 0.5:
        raise NumericalError("hyperparameter search failed at every start")

    cov, mean = _theta_to_specs(best_theta, config, n_dims)
    return BinaryGpcModel.fit(X, y, cov, mean, lik)
