"""Per-channel feature extraction with feature-level fusion.

Each sensor channel gets its own fitted reducer (a KPCA model or a stacked
autoencoder); per-channel features are concatenated in channel order and then
standardized per dimension using training statistics.  The fitted extractor
is reusable and serializable, so test points always pass through exactly the
transformation learned on training data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import KernelSpec, median_pairwise_distance
from .kpca import KpcaModel, kpca_fit, kpca_transform
from .sae import SaeModel, SaeSpec, sae_fit
from .signals import FaultDataset

__all__ = ["METHOD_POOL", "ALL_METHODS", "ExtractorConfig", "FeatureExtractor",
           "extract_features"]

# default grid-search pool; the sigmoid kernel is available but not pooled
METHOD_POOL = ("sae", "kpca-linear", "kpca-polynomial", "kpca-gaussian",
               "kpca-exponential")
ALL_METHODS = METHOD_POOL + ("kpca-sigmoid",)

_STD_FLOOR = 1e-12  # below this a feature column counts as constant


@dataclass(frozen=True)
class ExtractorConfig:
    """Knobs for both extraction families.

    kpca_sigma=None means the per-channel median pairwise distance (the
    median heuristic) is used for gaussian/exponential kernels.
    """

    n_components: int = 10
    kpca_sigma: float | None = None
    kpca_poly_a: float = 1.0
    kpca_poly_b: float = 3.0
    kpca_sigmoid_a: float = 1.0
    kpca_sigmoid_b: float = 1.0
    sae_hidden: tuple[int, int] = (100, 10)
    sae_learning_rate: float = 1e-3
    sae_momentum: float = 0.9
    sae_epochs: int = 500
    seed: int = 0


@dataclass
class ChannelSae:
    """SAE reducer for one channel plus its input rescaling to [0, 1]."""

    model: SaeModel
    scale_lo: float
    scale_span: float

    def transform(self, X: np.ndarray) -> np.ndarray:
        return self.model.encode((X - self.scale_lo) / self.scale_span)

    def to_json_dict(self) -> dict:
        return {"model": self.model.to_json_dict(),
                "scale_lo": self.scale_lo, "scale_span": self.scale_span}

    @staticmethod
    def from_json_dict(d) -> "ChannelSae":
        return ChannelSae(SaeModel.from_json_dict(d["model"]),
                          float(d["scale_lo"]), float(d["scale_span"]))


@dataclass
class FeatureExtractor:
    """Fitted per-channel reducers plus the fused-feature standardization."""

    method_id: str
    channels: tuple[str, ...]
    points_per_channel: int
    channel_models: list
    feature_mean: np.ndarray
    feature_std: np.ndarray       # constant columns hold 1.0 and are masked
    constant_mask: np.ndarray
    output_dim: int

    def _raw_features(self, samples: np.ndarray) -> np.ndarray:
        L = self.points_per_channel
        parts = []
        for i, model in enumerate(self.channel_models):
            chunk = samples[:, i * L:(i + 1) * L]
            if isinstance(model, KpcaModel):
                parts.append(kpca_transform(model, chunk))
            else:
                parts.append(model.transform(chunk))
        return np.concatenate(parts, axis=1)

    def transform(self, samples) -> np.ndarray:
        """Map raw fused samples (Q, c*L) to standardized features (Q, D)."""
        samples = np.ascontiguousarray(samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[1] != len(self.channels) * self.points_per_channel:
            raise ValueError(
                f"expected shape (*, {len(self.channels) * self.points_per_channel}), "
                f"got {samples.shape}"
            )
        feats = (self._raw_features(samples) - self.feature_mean) / self.feature_std
        feats[:, self.constant_mask] = 0.0
        return feats

    def transform_one(self, x) -> np.ndarray:
        x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
        return self.transform(x[None, :])[0]

    def to_json_dict(self) -> dict:
        models = []
        for m in self.channel_models:
            if isinstance(m, KpcaModel):
                models.append({"type": "kpca", "state": m.to_json_dict()})
            else:
                models.append({"type": "sae", "state": m.to_json_dict()})
        return {
            "method_id": self.method_id,
            "channels": list(self.channels),
            "points_per_channel": self.points_per_channel,
            "channel_models": models,
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
            "constant_mask": self.constant_mask.astype(int).tolist(),
            "output_dim": self.output_dim,
        }

    @staticmethod
    def from_json_dict(d) -> "FeatureExtractor":
        models = []
        for entry in d["channel_models"]:
            if entry["type"] == "kpca":
                models.append(KpcaModel.from_json_dict(entry["state"]))
            else:
                models.append(ChannelSae.from_json_dict(entry["state"]))
        return FeatureExtractor(
            method_id=str(d["method_id"]),
            channels=tuple(d["channels"]),
            points_per_channel=int(d["points_per_channel"]),
            channel_models=models,
            feature_mean=np.asarray(d["feature_mean"], dtype=np.float64),
            feature_std=np.asarray(d["feature_std"], dtype=np.float64),
            constant_mask=np.asarray(d["constant_mask"], dtype=bool),
            output_dim=int(d["output_dim"]),
        )


def _kpca_spec(kind: str, channel_data: np.ndarray, config: ExtractorConfig) -> KernelSpec:
    if kind in ("gaussian", "exponential"):
        sigma = config.kpca_sigma
        if sigma is None:
            sigma = median_pairwise_distance(channel_data)
        return KernelSpec(kind, sigma=sigma)
    if kind == "polynomial":
        return KernelSpec(kind, a=config.kpca_poly_a, b=config.kpca_poly_b)
    if kind == "sigmoid":
        return KernelSpec(kind, a=config.kpca_sigmoid_a, b=config.kpca_sigmoid_b)
    return KernelSpec("linear")


def extract_features(dataset: FaultDataset, method_id: str,
                     config: ExtractorConfig = ExtractorConfig()
                     ) -> tuple[FeatureExtractor, np.ndarray]:
    """Fit one reducer per channel on the dataset and return fused features.

    Returns (extractor, features); applying extractor.transform to the same
    samples reproduces the returned matrix.
    """
    if method_id not in ALL_METHODS:
        raise ValueError(f"unknown method_id {method_id!r}; expected one of {ALL_METHODS}")
    if len(dataset) == 0:
        raise ValueError("dataset is empty")

    channel_models: list = []
    parts: list[np.ndarray] = []
    ss = np.random.SeedSequence(config.seed)
    channel_seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(dataset.n_channels)]
    for ch, ch_seed in zip(dataset.channels, channel_seeds):
        ch_X = np.ascontiguousarray(dataset.channel_view(ch))
        if method_id == "sae":
            lo = float(ch_X.min())
            span = float(ch_X.max()) - lo
            if span <= 0:
                span = 1.0
            sizes = (ch_X.shape[1],) + tuple(config.sae_hidden)
            spec = SaeSpec(sizes, config.sae_learning_rate, config.sae_momentum,
                           config.sae_epochs, seed=ch_seed)
            model = ChannelSae(sae_fit((ch_X - lo) / span, spec), lo, span)
            parts.append(model.model.encode((ch_X - lo) / span))
        else:
            kind = method_id.removeprefix("kpca-")
            spec = _kpca_spec(kind, ch_X, config)
            model = kpca_fit(ch_X, spec, config.n_components)
            parts.append(model.training_scores)
        channel_models.append(model)

    raw = np.concatenate(parts, axis=1)
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    constant = std <= _STD_FLOOR
    std_safe = np.where(constant, 1.0, std)
    feats = (raw - mean) / std_safe
    feats[:, constant] = 0.0

    extractor = FeatureExtractor(
        method_id=method_id,
        channels=dataset.channels,
        points_per_channel=dataset.points_per_channel,
        channel_models=channel_models,
        feature_mean=mean,
        feature_std=std_safe,
        constant_mask=constant,
        output_dim=raw.shape[1],
    )
    return extractor, feats
