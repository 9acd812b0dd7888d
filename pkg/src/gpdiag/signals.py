"""Vibration data handling.

Ingestion of raw accelerometer channels, segmentation into fixed-length
windows, channel fusion (sample-level concatenation), white-noise injection,
a synthetic impulse-train generator for desk-scale experiments, stratified
train/test splitting, and the JSON dataset-manifest format.

All operations are pure given (inputs, seed); datasets are plain arrays plus
metadata and are never mutated after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "VibrationRecord",
    "SegmentedSample",
    "FaultDataset",
    "SynthSpec",
    "load_record",
    "segment_record",
    "fuse_channels",
    "inject_noise",
    "render_impulse_signal",
    "synth_dataset",
    "stratified_split",
    "load_manifest",
    "dataset_from_manifest",
]

RECORD_FORMATS = ("csv", "raw-f64-le")


@dataclass(frozen=True)
class VibrationRecord:
    """One accelerometer channel: a raw time series at a fixed sampling rate."""

    channel_id: str
    sampling_rate_hz: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if not self.sampling_rate_hz > 0:
            raise ValueError(f"sampling_rate_hz must be positive, got {self.sampling_rate_hz}")
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("record has no samples")
        bad = np.flatnonzero(~np.isfinite(samples))
        if bad.size:
            raise ValueError(f"non-finite sample at index {int(bad[0])}")

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class SegmentedSample:
    """A single labeled window, possibly spanning several fused channels."""

    class_id: int
    points: np.ndarray
    channel_layout: tuple[str, ...]


@dataclass
class FaultDataset:
    """Labeled, segmented, optionally fused vibration samples.

    samples has shape (N, n_channels * points_per_channel); each row lays the
    channels out contiguously in the order given by ``channels``.
    """

    samples: np.ndarray
    labels: np.ndarray
    class_map: dict[int, str]
    channels: tuple[str, ...]
    points_per_channel: int

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        self.channels = tuple(self.channels)
        if self.samples.ndim != 2:
            raise ValueError("samples must be a 2-D array")
        if self.labels.shape != (self.samples.shape[0],):
            raise ValueError("labels length must match sample count")
        expected = len(self.channels) * self.points_per_channel
        if self.samples.shape[0] and self.samples.shape[1] != expected:
            raise ValueError(
                f"sample length {self.samples.shape[1]} != "
                f"{len(self.channels)} channels x {self.points_per_channel} points"
            )
        unknown = set(np.unique(self.labels)) - set(self.class_map)
        if unknown:
            raise ValueError(f"labels {sorted(unknown)} missing from class_map")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain non-finite values")

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def class_ids(self) -> list[int]:
        return sorted(self.class_map)

    def channel_slice(self, channel: str) -> slice:
        i = self.channels.index(channel)
        L = self.points_per_channel
        return slice(i * L, (i + 1) * L)

    def channel_view(self, channel: str) -> np.ndarray:
        """(N, points_per_channel) view of one channel's windows."""
        return self.samples[:, self.channel_slice(channel)]

    def class_counts(self) -> dict[int, int]:
        ids, counts = np.unique(self.labels, return_counts=True)
        return {int(c): int(n) for c, n in zip(ids, counts)}

    def assert_class_coverage(self, min_per_class: int = 1) -> None:
        counts = self.class_counts()
        for c in self.class_map:
            if counts.get(c, 0) < min_per_class:
                raise ValueError(
                    f"class {c} has {counts.get(c, 0)} samples; need >= {min_per_class}"
                )

    def subset(self, indices: np.ndarray) -> "FaultDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return FaultDataset(
            self.samples[indices].copy(),
            self.labels[indices].copy(),
            dict(self.class_map),
            self.channels,
            self.points_per_channel,
        )

    def select_channels(self, channels: Sequence[str]) -> "FaultDataset":
        """Dataset restricted to the given channels, preserving their order."""
        channels = tuple(channels)
        for ch in channels:
            if ch not in self.channels:
                raise ValueError(f"unknown channel {ch!r}; have {self.channels}")
        cols = np.concatenate([np.r_[self.channel_slice(ch)] for ch in channels])
        return FaultDataset(
            self.samples[:, cols].copy(),
            self.labels.copy(),
            dict(self.class_map),
            channels,
            self.points_per_channel,
        )

    def iter_samples(self) -> Iterator[SegmentedSample]:
        for i in range(len(self)):
            yield SegmentedSample(int(self.labels[i]), self.samples[i], self.channels)


def load_record(path, fmt: str = "csv", sampling_rate_hz: float = 12000.0,
                channel_id: str = "DE") -> VibrationRecord:
    """Read one channel from disk.

    fmt "csv" expects one real per line (decimal or scientific notation);
    "raw-f64-le" expects little-endian 8-byte floats with no header.
    """
    p = Path(path)
    if fmt == "csv":
        values = []
        with open(p, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                tok = line.strip()
                if not tok:
                    continue
                try:
                    values.append(float(tok))
                except ValueError:
                    raise ValueError(
                        f"{p}: non-numeric token {tok!r} on line {lineno}"
                    ) from None
        data = np.asarray(values, dtype=np.float64)
    elif fmt == "raw-f64-le":
        raw = p.read_bytes()
        if len(raw) % 8:
            raise ValueError(f"{p}: file size {len(raw)} is not a multiple of 8 bytes")
        data = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    else:
        raise ValueError(f"unknown record format {fmt!r}; expected one of {RECORD_FORMATS}")
    if data.size == 0:
        raise ValueError(f"{p}: no samples")
    bad = np.flatnonzero(~np.isfinite(data))
    if bad.size:
        raise ValueError(f"{p}: non-finite value at index {int(bad[0])}")
    return VibrationRecord(channel_id, float(sampling_rate_hz), data)


def segment_record(record: VibrationRecord, points_per_sample: int,
                   n_samples: int) -> np.ndarray:
    """Split a record into n_samples contiguous non-overlapping windows.

    Returns an (n_samples, points_per_sample) array; window i covers input
    indices [i*L, (i+1)*L).
    """
    if points_per_sample < 1 or n_samples < 1:
        raise ValueError("points_per_sample and n_samples must be >= 1")
    need = points_per_sample * n_samples
    if len(record) < need:
        raise ValueError(
            f"record too short: {len(record)} points, need {need} "
            f"({n_samples} x {points_per_sample})"
        )
    return record.samples[:need].reshape(n_samples, points_per_sample).copy()


def fuse_channels(per_channel_windows: Mapping[str, np.ndarray],
                  labels: Sequence[int],
                  mode: str = "concat",
                  channel: str | None = None,
                  channel_order: Sequence[str] | None = None,
                  class_map: Mapping[int, str] | None = None) -> FaultDataset:
    """Assemble a dataset from per-channel window stacks.

    mode "concat" joins each window index's channels in the declared order;
    mode "single" keeps only ``channel``.  The declared order is
    channel_order if given, else the mapping's iteration order.
    """
    order = tuple(channel_order) if channel_order is not None else tuple(per_channel_windows)
    if not order:
        raise ValueError("no channels given")
    arrays = {}
    n = L = None
    for ch in order:
        if ch not in per_channel_windows:
            raise ValueError(f"channel {ch!r} missing from per_channel_windows")
        w = np.ascontiguousarray(per_channel_windows[ch], dtype=np.float64)
        if w.ndim != 2:
            raise ValueError(f"channel {ch!r}: windows must be 2-D")
        if n is None:
            n, L = w.shape
        elif w.shape != (n, L):
            raise ValueError(
                f"channel {ch!r}: shape {w.shape} does not match {(n, L)}"
            )
        arrays[ch] = w
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise ValueError(f"labels length {labels.shape} does not match window count {n}")

    if mode == "concat":
        samples = np.concatenate([arrays[ch] for ch in order], axis=1)
        kept = order
    elif mode == "single":
        if channel is None or channel not in arrays:
            raise ValueError(f"single mode needs a known channel, got {channel!r}")
        samples = arrays[channel].copy()
        kept = (channel,)
    else:
        raise ValueError(f"unknown fusion mode {mode!r}")

    if class_map is None:
        class_map = {int(c): f"class-{int(c)}" for c in np.unique(labels)}
    return FaultDataset(samples, labels, dict(class_map), kept, L)


def inject_noise(dataset: FaultDataset, percent: float, seed: int) -> FaultDataset:
    """Add zero-mean Gaussian noise, scaled per sample and per channel.

    The noise std for each channel segment is (percent / 100) times that
    segment's sample standard deviation, so the perturbation is relative to
    local signal energy.  percent = 0 returns an untouched copy.
    """
    if percent < 0:
        raise ValueError(f"noise percent must be >= 0, got {percent}")
    out = dataset.samples.copy()
    if percent > 0 and len(dataset):
        rng = np.random.default_rng(seed)
        n, c, L = len(dataset), dataset.n_channels, dataset.points_per_channel
        view = out.reshape(n, c, L)
        stds = view.std(axis=2, ddof=1)
        view += rng.standard_normal((n, c, L)) * (percent / 100.0 * stds)[:, :, None]
    return FaultDataset(out, dataset.labels.copy(), dict(dataset.class_map),
                        dataset.channels, dataset.points_per_channel)


def render_impulse_signal(n_points: int, sampling_rate_hz: float,
                          char_freq_hz: float, amplitude: float,
                          resonance_center_hz: float, resonance_width_hz: float,
                          phase: float = 0.0) -> np.ndarray:
    """Deterministic fault signature: an impulse train exciting a resonance.

    Impulses repeat at char_freq_hz (offset by ``phase`` periods) and are
    convolved with an exponentially decaying band-limited oscillation at
    resonance_center_hz whose decay rate follows resonance_width_hz.
    """
    if min(sampling_rate_hz, char_freq_hz, amplitude,
           resonance_center_hz, resonance_width_hz) <= 0:
        raise ValueError("all signal parameters must be positive")
    tau = 1.0 / (math.pi * resonance_width_hz)
    klen = int(min(n_points, max(8, math.ceil(6.0 * tau * sampling_rate_hz))))
    t = np.arange(klen) / sampling_rate_hz
    kernel = np.exp(-t / tau) * np.sin(2.0 * math.pi * resonance_center_hz * t)

    period = sampling_rate_hz / char_freq_hz
    n_impulses = int(math.floor((n_points - 1) / period)) + 2
    idx = np.round((np.arange(n_impulses) + phase) * period).astype(np.int64)
    idx = idx[(idx >= 0) & (idx < n_points)]
    train = np.zeros(n_points)
    np.add.at(train, idx, amplitude)
    return np.convolve(train, kernel)[:n_points]


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the synthetic two-channel fault dataset generator."""

    n_classes: int
    samples_per_class: int
    points_per_channel: int
    sampling_rate_hz: float
    char_freqs_hz: tuple[float, ...]
    impulse_amplitudes: tuple[float, ...]
    resonance_centers_hz: tuple[float, ...]
    resonance_widths_hz: tuple[float, ...]
    noise_std: float = 0.25

    def __post_init__(self):
        for name in ("char_freqs_hz", "impulse_amplitudes",
                     "resonance_centers_hz", "resonance_widths_hz"):
            vals = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, vals)
            if len(vals) != self.n_classes:
                raise ValueError(f"{name} needs one value per class")
            if any(v <= 0 for v in vals):
                raise ValueError(f"{name} values must be positive")
        if self.n_classes < 1 or self.samples_per_class < 1:
            raise ValueError("n_classes and samples_per_class must be >= 1")
        if self.points_per_channel < 8:
            raise ValueError("points_per_channel must be >= 8")
        if self.sampling_rate_hz <= 0:
            raise ValueError("sampling_rate_hz must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if len(set(self.char_freqs_hz)) != self.n_classes:
            raise ValueError("characteristic frequencies must be pairwise distinct")

    @staticmethod
    def default(n_classes: int = 4, samples_per_class: int = 50,
                points_per_channel: int = 400, sampling_rate_hz: float = 12000.0,
                noise_std: float = 0.25) -> "SynthSpec":
        # Impulse rates dense enough that every window sees several impacts,
        # and amplitudes stepped like growing fault severities, so per-window
        # energy statistics separate the classes regardless of impulse phase.
        k = np.arange(n_classes)
        return SynthSpec(
            n_classes=n_classes,
            samples_per_class=samples_per_class,
            points_per_channel=points_per_channel,
            sampling_rate_hz=sampling_rate_hz,
            char_freqs_hz=tuple(150.0 + 80.0 * k),
            impulse_amplitudes=tuple(1.5 ** k),
            resonance_centers_hz=tuple(1500.0 + 700.0 * k),
            resonance_widths_hz=tuple(300.0 + 30.0 * k),
            noise_std=noise_std,
        )

    def to_json_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "samples_per_class": self.samples_per_class,
            "points_per_channel": self.points_per_channel,
            "sampling_rate_hz": self.sampling_rate_hz,
            "char_freqs_hz": list(self.char_freqs_hz),
            "impulse_amplitudes": list(self.impulse_amplitudes),
            "resonance_centers_hz": list(self.resonance_centers_hz),
            "resonance_widths_hz": list(self.resonance_widths_hz),
            "noise_std": self.noise_std,
        }

    @staticmethod
    def from_json_dict(d: Mapping) -> "SynthSpec":
        return SynthSpec(
            n_classes=int(d["n_classes"]),
            samples_per_class=int(d["samples_per_class"]),
            points_per_channel=int(d["points_per_channel"]),
            sampling_rate_hz=float(d["sampling_rate_hz"]),
            char_freqs_hz=tuple(d["char_freqs_hz"]),
            impulse_amplitudes=tuple(d["impulse_amplitudes"]),
            resonance_centers_hz=tuple(d["resonance_centers_hz"]),
            resonance_widths_hz=tuple(d["resonance_widths_hz"]),
            noise_std=float(d.get("noise_std", 0.25)),
        )


# Per-sample impulse phase walks the unit interval by the golden ratio:
# deterministic (independent of the noise RNG) yet well spread, so two
# classes with identical physical parameters produce identical clean signals.
_PHASE_STEP = 0.6180339887498949


def synth_dataset(spec: SynthSpec, seed: int) -> FaultDataset:
    """Generate a labeled two-channel dataset from a SynthSpec.

    Channel "DE" carries the rendered signature plus noise; channel "FE" is
    the same signature attenuated by 0.5 with 1.5x the noise, mimicking a
    sensor mounted further from the fault.
    """
    rng = np.random.default_rng(seed)
    L = spec.points_per_channel
    rows = []
    labels = []
    for k in range(spec.n_classes):
        for s in range(spec.samples_per_class):
            phase = math.fmod(s * _PHASE_STEP, 1.0)
            sig = render_impulse_signal(
                L, spec.sampling_rate_hz, spec.char_freqs_hz[k],
                spec.impulse_amplitudes[k], spec.resonance_centers_hz[k],
                spec.resonance_widths_hz[k], phase,
            )
            if spec.noise_std > 0:
                de = sig + rng.standard_normal(L) * spec.noise_std
                fe = 0.5 * sig + rng.standard_normal(L) * (1.5 * spec.noise_std)
            else:
                de = sig
                fe = 0.5 * sig
            rows.append(np.concatenate([de, fe]))
            labels.append(k + 1)
    class_map = {
        k + 1: f"synthetic-fault-{k + 1} ({spec.char_freqs_hz[k]:g} Hz)"
        for k in range(spec.n_classes)
    }
    return FaultDataset(np.asarray(rows), np.asarray(labels), class_map,
                        ("DE", "FE"), L)


def stratified_split(dataset: FaultDataset, n_test_per_class: int,
                     seed: int) -> tuple[FaultDataset, FaultDataset]:
    """Uniform per-class test draw without replacement; train is the rest.

    Both subsets preserve the original sample order.  Every class must have
    strictly more samples than n_test_per_class.
    """
    if n_test_per_class < 0:
        raise ValueError("n_test_per_class must be >= 0")
    rng = np.random.default_rng(seed)
    counts = dataset.class_counts()
    test_idx: list[int] = []
    for c in dataset.class_ids:
        have = counts.get(c, 0)
        if have <= n_test_per_class:
            raise ValueError(
                f"class {c} has {have} samples; need more than {n_test_per_class}"
            )
        idx = np.flatnonzero(dataset.labels == c)
        take = rng.permutation(idx.size)[:n_test_per_class]
        test_idx.extend(int(i) for i in idx[take])
    test_mask = np.zeros(len(dataset), dtype=bool)
    test_mask[test_idx] = True
    return dataset.subset(np.flatnonzero(~test_mask)), dataset.subset(np.flatnonzero(test_mask))


def load_manifest(path) -> dict:
    """Read and structurally validate a dataset manifest JSON document."""
    p = Path(path)
    with open(p, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for key in ("classes", "sampling_rate_hz", "points_per_sample", "samples_per_class"):
        if key not in doc:
            raise ValueError(f"{p}: manifest missing field {key!r}")
    if not doc["classes"]:
        raise ValueError(f"{p}: manifest lists no classes")
    channels = list(doc["classes"][0]["files"])
    for entry in doc["classes"]:
        for key in ("id", "label", "files"):
            if key not in entry:
                raise ValueError(f"{p}: class entry missing field {key!r}")
        if list(entry["files"]) != channels:
            raise ValueError(
                f"{p}: class {entry['id']} declares channels "
                f"{list(entry['files'])}, expected {channels}"
            )
    return doc


def dataset_from_manifest(path, fusion: str = "concat",
                          channel: str | None = None) -> FaultDataset:
    """Build a FaultDataset from a manifest: load, segment, label, fuse.

    File paths in the manifest are resolved relative to its directory;
    ``format`` in the manifest selects csv (default) or raw-f64-le files.
    """
    p = Path(path)
    doc = load_manifest(p)
    fmt = doc.get("format", "csv")
    fs = float(doc["sampling_rate_hz"])
    L = int(doc["points_per_sample"])
    n_per_class = int(doc["samples_per_class"])
    channels = list(doc["classes"][0]["files"])

    per_channel: dict[str, list[np.ndarray]] = {ch: [] for ch in channels}
    labels: list[int] = []
    class_map: dict[int, str] = {}
    for entry in doc["classes"]:
        cid = int(entry["id"])
        class_map[cid] = str(entry["label"])
        for ch in channels:
            rec = load_record(p.parent / entry["files"][ch], fmt, fs, ch)
            per_channel[ch].append(segment_record(rec, L, n_per_class))
        labels.extend([cid] * n_per_class)

    stacked = {ch: np.vstack(per_channel[ch]) for ch in channels}
    return fuse_channels(stacked, labels, mode=fusion, channel=channel,
                         channel_order=channels, class_map=class_map)
