"""One-against-all assembly of binary classifiers.

Each class gets its own binary GPC trained on relabeled data (that class
+1, all others -1).  Prediction reports the raw per-class posterior-mean
probabilities -- these need not sum to one, which is the point of the
probabilistic report -- together with a normalized convenience vector and
the argmax decision, ties broken toward the lowest class id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .laplace import BinaryGpcModel
from .optimize import GpcConfig, optimize_hyperparams

__all__ = ["ClassProbabilities", "OvrEnsemble", "ovr_train", "ovr_predict",
           "predict_batch"]


@dataclass
class ClassProbabilities:
    """Per-class probability report for one sample."""

    raw: dict[int, float]
    normalized: dict[int, float]
    decision: int
    runner_up: int

    @staticmethod
    def from_raw(raw: dict[int, float]) -> "ClassProbabilities":
        if len(raw) < 2:
            raise ValueError("need probabilities for at least 2 classes")
        ids = sorted(raw)
        values = np.array([raw[c] for c in ids])
        total = float(values.sum())
        normalized = {c: float(v / total) for c, v in zip(ids, values)}
        top = int(np.argmax(values))           # first max -> lowest class id
        rest = values.copy()
        rest[top] = -np.inf
        second = int(np.argmax(rest))
        return ClassProbabilities(raw={c: float(v) for c, v in zip(ids, values)},
                                  normalized=normalized,
                                  decision=ids[top], runner_up=ids[second])

    def to_json_dict(self) -> dict:
        return {
            "raw": {str(c): p for c, p in self.raw.items()},
            "normalized": {str(c): p for c, p in self.normalized.items()},
            "decision": self.decision,
            "runner_up": self.runner_up,
        }


@dataclass
class OvrEnsemble:
    """One binary model per class, sharing a single feature space."""

    class_ids: tuple[int, ...]
    models: list[BinaryGpcModel]
    feature_dim: int

    def predict(self, x) -> ClassProbabilities:
        x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
        return self.predict_batch(x[None, :])[0]

    def predict_batch(self, X) -> list[ClassProbabilities]:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.feature_dim:
            raise ValueError(f"expected shape (*, {self.feature_dim}), got {X.shape}")
        if X.shape[0] == 0:
            return []
        per_class = np.vstack([m.predict_probability_batch(X) for m in self.models])
        return [
            ClassProbabilities.from_raw(
                {c: float(per_class[k, i]) for k, c in enumerate(self.class_ids)}
            )
            for i in range(X.shape[0])
        ]

    def to_json_dict(self) -> dict:
        return {
            "class_ids": list(self.class_ids),
            "feature_dim": self.feature_dim,
            "models": [m.to_json_dict() for m in self.models],
        }

    @staticmethod
    def from_json_dict(d) -> "OvrEnsemble":
        return OvrEnsemble(
            class_ids=tuple(int(c) for c in d["class_ids"]),
            models=[BinaryGpcModel.from_json_dict(m) for m in d["models"]],
            feature_dim=int(d["feature_dim"]),
        )


def ovr_train(features, labels, config: GpcConfig = GpcConfig(),
              seed: int = 0) -> OvrEnsemble:
    """Train one binary GPC per class on relabeled data.

    Per-class optimizer seeds are derived deterministically from the master
    seed, so the ensemble is reproducible.
    """
    X = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or labels.shape != (X.shape[0],):
        raise ValueError("features must be 2-D with one label per row")
    class_ids = tuple(int(c) for c in np.unique(labels))
    if len(class_ids) < 2:
        raise ValueError(f"need at least 2 classes, got {len(class_ids)}")
    counts = {c: int((labels == c).sum()) for c in class_ids}
    small = {c: n for c, n in counts.items() if n < 2}
    if small:
        raise ValueError(f"classes with fewer than 2 samples: {small}")

    seeds = [int(s.generate_state(1)[0])
             for s in np.random.SeedSequence(seed).spawn(len(class_ids))]
    models = []
    for c, class_seed in zip(class_ids, seeds):
        y = np.where(labels == c, 1.0, -1.0)
        try:
            models.append(optimize_hyperparams(X, y, config, seed=class_seed))
        except Exception as exc:
            raise type(exc)(f"class {c}: {exc}") from exc
    return OvrEnsemble(class_ids, models, X.shape[1])


def ovr_predict(ensemble: OvrEnsemble, x) -> ClassProbabilities:
    return ensemble.predict(x)


def predict_batch(ensemble: OvrEnsemble, X) -> list[ClassProbabilities]:
    return ensemble.predict_batch(X)
