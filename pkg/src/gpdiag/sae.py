"""Stacked autoencoder for unsupervised feature extraction.

Two autoencoders trained greedily: the first on the raw (rescaled) windows,
the second on the first's hidden codes.  Encoders use a logistic sigmoid,
decoders are linear, and training is full-batch gradient descent with
momentum on the mean squared reconstruction error.  No supervised
fine-tuning: the second hidden code is the extracted feature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .exceptions import NumericalError

__all__ = ["SaeSpec", "AutoencoderWeights", "SaeModel",
           "reconstruction_loss_and_grads", "ae_fit", "ae_encode", "sae_fit"]


@dataclass(frozen=True)
class SaeSpec:
    """Architecture and training settings for the two-stage stack."""

    layer_sizes: tuple[int, int, int]  # (input, hidden1, hidden2)
    learning_rate: float = 1e-3
    momentum: float = 0.9
    epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        m, l1, l2 = self.layer_sizes
        if not (m > l1 > l2 >= 1):
            raise ValueError(f"layer sizes must satisfy input > h1 > h2 >= 1, got {self.layer_sizes}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class AutoencoderWeights:
    """One trained encoder/decoder pair."""

    w_enc: np.ndarray  # (L, M)
    b_enc: np.ndarray  # (L,)
    w_dec: np.ndarray  # (M, L)
    b_dec: np.ndarray  # (M,)
    activation: str    # "sigmoid" | "linear" (encoder; decoder is always linear)
    final_loss: float
    loss_history: np.ndarray  # loss before training plus one value per epoch

    def to_json_dict(self) -> dict:
        return {
            "w_enc": self.w_enc.tolist(), "b_enc": self.b_enc.tolist(),
            "w_dec": self.w_dec.tolist(), "b_dec": self.b_dec.tolist(),
            "activation": self.activation, "final_loss": self.final_loss,
        }

    @staticmethod
    def from_json_dict(d) -> "AutoencoderWeights":
        return AutoencoderWeights(
            np.asarray(d["w_enc"], dtype=np.float64),
            np.asarray(d["b_enc"], dtype=np.float64),
            np.asarray(d["w_dec"], dtype=np.float64),
            np.asarray(d["b_dec"], dtype=np.float64),
            str(d["activation"]), float(d["final_loss"]),
            np.empty(0),
        )


def _encode(X, w_enc, b_enc, activation):
    Z = X @ w_enc.T + b_enc
    if activation == "sigmoid":
        return expit(Z)
    if activation == "linear":
        return Z
    raise ValueError(f"unknown activation {activation!r}")


def reconstruction_loss_and_grads(X, w_enc, b_enc, w_dec, b_dec,
                                  activation="sigmoid"):
    """Mean squared reconstruction error and its analytic gradients.

    Loss is (1 / 2P) * sum of squared residuals over the batch.  Returns
    (loss, grads) with grads keyed like the weight arguments.
    """
    P = X.shape[0]
    H = _encode(X, w_enc, b_enc, activation)
    R = H @ w_dec.T + b_dec - X  # residual
    loss = float(0.5 / P * np.einsum("ij,ij->", R, R))

    dXhat = R / P
    g_w_dec = dXhat.T @ H
    g_b_dec = dXhat.sum(axis=0)
    dH = dXhat @ w_dec
    if activation == "sigmoid":
        dZ = dH * H * (1.0 - H)
    else:
        dZ = dH
    g_w_enc = dZ.T @ X
    g_b_enc = dZ.sum(axis=0)
    grads = {"w_enc": g_w_enc, "b_enc": g_b_enc, "w_dec": g_w_dec, "b_dec": g_b_dec}
    return loss, grads


def ae_fit(X, hidden: int, learning_rate: float = 1e-3, momentum: float = 0.9,
           epochs: int = 500, seed: int = 0,
           activation: str = "sigmoid") -> AutoencoderWeights:
    """Train a single autoencoder by full-batch gradient descent with momentum.

    Weights start uniform in +-1/sqrt(fan_in), biases at zero; the run is
    deterministic for a given seed.  Raises NumericalError if the loss stops
    being finite.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    if hidden < 1:
        raise ValueError("hidden size must be >= 1")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    P, M = X.shape
    rng = np.random.default_rng(seed)
    params = {
        "w_enc": rng.uniform(-1, 1, size=(hidden, M)) / np.sqrt(M),
        "b_enc": np.zeros(hidden),
        "w_dec": rng.uniform(-1, 1, size=(M, hidden)) / np.sqrt(hidden),
        "b_dec": np.zeros(M),
    }
    velocity = {k: np.zeros_like(v) for k, v in params.items()}

    loss, grads = reconstruction_loss_and_grads(X, activation=activation, **params)
    history = [loss]
    for epoch in range(epochs):
        for k in params:
            velocity[k] = momentum * velocity[k] - learning_rate * grads[k]
            params[k] = params[k] + velocity[k]
        loss, grads = reconstruction_loss_and_grads(X, activation=activation, **params)
        if not np.isfinite(loss):
            raise NumericalError(f"autoencoder loss became non-finite at epoch {epoch + 1}")
        history.append(loss)

    return AutoencoderWeights(params["w_enc"], params["b_enc"],
                              params["w_dec"], params["b_dec"],
                              activation, history[-1], np.asarray(history))


def ae_encode(weights: AutoencoderWeights, X) -> np.ndarray:
    """Hidden representation of the rows of X under a trained autoencoder."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    return _encode(X, weights.w_enc, weights.b_enc, weights.activation)


@dataclass
class SaeModel:
    """Greedily trained two-stage stack; encode() yields the final features."""

    stages: tuple[AutoencoderWeights, AutoencoderWeights]
    layer_sizes: tuple[int, int, int]

    def encode(self, X) -> np.ndarray:
        h = ae_encode(self.stages[0], X)
        return ae_encode(self.stages[1], h)

    def to_json_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "stages": [s.to_json_dict() for s in self.stages],
        }

    @staticmethod
    def from_json_dict(d) -> "SaeModel":
        stages = tuple(AutoencoderWeights.from_json_dict(s) for s in d["stages"])
        return SaeModel(stages, tuple(int(v) for v in d["layer_sizes"]))


def sae_fit(X, spec: SaeSpec) -> SaeModel:
    """Train the stack: stage 1 on X, stage 2 on stage 1's hidden codes."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    m, l1, l2 = spec.layer_sizes
    if X.ndim != 2 or X.shape[1] != m:
        raise ValueError(f"expected shape (*, {m}), got {X.shape}")
    ss = np.random.SeedSequence(spec.seed)
    seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(2)]
    first = ae_fit(X, l1, spec.learning_rate, spec.momentum, spec.epochs,
                   seed=seeds[0])
    hidden = ae_encode(first, X)
    second = ae_fit(hidden, l2, spec.learning_rate, spec.momentum, spec.epochs,
                    seed=seeds[1])
    return SaeModel((first, second), spec.layer_sizes)
