"""Classification likelihoods linking the latent function to +-1 labels.

Both choices map a latent value through a squashing function: the logistic
sigmoid or the standard normal CDF (probit).  Alongside the probability
itself, the log likelihood and its first two derivatives with respect to the
latent are exposed for the Newton iterations of the posterior fit; both
likelihoods are log-concave, so the negative second derivative is always
nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_ndtr, ndtr

__all__ = ["LIKELIHOOD_KINDS", "LikelihoodSpec", "likelihood_eval",
           "log_likelihood_terms", "predictive_from_latent",
           "PROBABILITY_FLOOR"]

LIKELIHOOD_KINDS = ("logistic", "cumulative-gaussian")

# reported probabilities are kept strictly inside (0, 1)
PROBABILITY_FLOOR = 1e-12

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)

# 32-node Gauss-Hermite rule for the logistic predictive integral
_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(32)


@dataclass(frozen=True)
class LikelihoodSpec:
    kind: str  # "logistic" | "cumulative-gaussian"

    def __post_init__(self):
        if self.kind not in LIKELIHOOD_KINDS:
            raise ValueError(
                f"unknown likelihood kind {self.kind!r}; expected one of {LIKELIHOOD_KINDS}"
            )


def _clamp(p):
    return np.clip(p, PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)


def likelihood_eval(spec: LikelihoodSpec, f, y) -> float:
    """p(y | f) for a single latent value and label in {+1, -1}."""
    f = float(f)
    y = float(y)
    if y not in (-1.0, 1.0):
        raise ValueError(f"label must be +1 or -1, got {y}")
    if not np.isfinite(f):
        raise ValueError(f"latent value must be finite, got {f}")
    if spec.kind == "logistic":
        p = expit(y * f)
    else:
        p = ndtr(y * f)
    return float(_clamp(p))


def log_likelihood_terms(spec: LikelihoodSpec, f, y):
    """log p(y|f) and its first two derivatives w.r.t. f, elementwise.

    f and y are broadcastable arrays with y in {+1, -1}.  All three outputs
    are finite for any finite latent (tails are evaluated in log space).
    """
    f = np.asarray(f, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = y * f
    if spec.kind == "logistic":
        logp = -np.logaddexp(0.0, -z)
        d1 = y * expit(-z)
        s = expit(f)
        d2 = -s * (1.0 - s)
    else:
        logp = log_ndtr(z)
        # ratio = pdf(z) / cdf(z), computed in log space so deep tails stay finite
        ratio = np.exp(-0.5 * z * z - _LOG_SQRT_2PI - logp)
        d1 = y * ratio
        d2 = -(ratio * ratio + z * ratio)
    return logp, d1, d2


def predictive_from_latent(spec: LikelihoodSpec, mu, var):
    """Posterior-mean probability of class +1 given a Gaussian latent.

    Integrates the likelihood against N(mu, var): the probit case has the
    closed form Phi(mu / sqrt(1 + var)); the logistic case uses 32-node
    Gauss-Hermite quadrature.  Output is clamped strictly inside (0, 1).
    """
    mu = np.asarray(mu, dtype=np.float64)
    var = np.asarray(var, dtype=np.float64)
    if np.any(var < 0):
        raise ValueError("latent variance must be nonnegative")
    if spec.kind == "cumulative-gaussian":
        p = ndtr(mu / np.sqrt(1.0 + var))
    else:
        shift = np.sqrt(2.0 * var)
        args = mu[..., None] + shift[..., None] * _GH_NODES
        p = (expit(args) @ _GH_WEIGHTS) / np.sqrt(np.pi)
    return _clamp(p)
