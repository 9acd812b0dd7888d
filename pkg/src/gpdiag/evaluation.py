"""Experiment harness: pipelines, cross-validation, grid search, noise sweeps.

The harness reproduces the measurement protocol end to end: leakage-safe
train/test pipelines (extractors fitted on training data only), repeated
stratified splits with accuracy mean/std, a grid search over the
feature-extraction method pool with paired splits, and a robustness sweep
over injected noise levels.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .extraction import METHOD_POOL, ExtractorConfig, extract_features
from .multiclass import ClassProbabilities, ovr_train
from .optimize import GpcConfig
from .signals import FaultDataset, inject_noise, stratified_split

__all__ = ["ConfusionMatrix", "MisclassRecord", "RunResult", "CvResult",
           "CvConfig", "GridSearchResult", "NoiseLevelResult",
           "confusion_matrix", "run_pipeline", "stratified_cv", "grid_search",
           "noise_sweep"]

log = logging.getLogger(__name__)


@dataclass
class ConfusionMatrix:
    """Count matrix with rows = predicted class, columns = target class."""

    counts: np.ndarray
    class_ids: tuple[int, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    @property
    def accuracy_pct(self) -> float:
        return 100.0 * self.accuracy

    def per_class_precision(self) -> dict[int, float]:
        """Correct fraction of each row (predicted class)."""
        out = {}
        for i, c in enumerate(self.class_ids):
            row = self.counts[i].sum()
            out[c] = float(self.counts[i, i] / row) if row else float("nan")
        return out

    def per_class_recall(self) -> dict[int, float]:
        """Correct fraction of each column (target class)."""
        out = {}
        for j, c in enumerate(self.class_ids):
            col = self.counts[:, j].sum()
            out[c] = float(self.counts[j, j] / col) if col else float("nan")
        return out

    def to_json_dict(self) -> dict:
        return {
            "class_ids": list(self.class_ids),
            "counts": self.counts.tolist(),
            "accuracy_pct": self.accuracy_pct,
        }

    def to_csv(self, path) -> None:
        """(K+1) x (K+1) table with row/column margins, predicted x target."""
        K = len(self.class_ids)
        with open(path, "w", encoding="utf-8") as fh:
            header = ["pred\\target"] + [str(c) for c in self.class_ids] + ["row_total"]
            fh.write(",".join(header) + "\n")
            for i, c in enumerate(self.class_ids):
                row = [str(c)] + [str(int(v)) for v in self.counts[i]]
                row.append(str(int(self.counts[i].sum())))
                fh.write(",".join(row) + "\n")
            col_totals = [str(int(v)) for v in self.counts.sum(axis=0)]
            fh.write(",".join(["col_total"] + col_totals + [str(self.total)]) + "\n")


def confusion_matrix(decisions, targets, class_ids) -> ConfusionMatrix:
    """Tally (predicted, target) pairs; class_ids may be a count K meaning 1..K."""
    if isinstance(class_ids, (int, np.integer)):
        ids = tuple(range(1, int(class_ids) + 1))
    else:
        ids = tuple(int(c) for c in class_ids)
    decisions = np.asarray(decisions, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64)
    if decisions.shape != targets.shape or decisions.ndim != 1:
        raise ValueError("decisions and targets must be equal-length vectors")
    if decisions.size == 0:
        raise ValueError("no samples to score")
    index = {c: i for i, c in enumerate(ids)}
    counts = np.zeros((len(ids), len(ids)), dtype=np.int64)
    for d, t in zip(decisions, targets):
        if int(d) not in index or int(t) not in index:
            raise ValueError(f"class pair ({d}, {t}) outside {ids}")
        counts[index[int(d)], index[int(t)]] += 1
    return ConfusionMatrix(counts, ids)


@dataclass
class MisclassRecord:
    """One wrongly decided test sample with both class probabilities."""

    sample_index: int
    actual_class: int
    actual_prob: float
    predicted_class: int
    predicted_prob: float

    def to_json_dict(self) -> dict:
        return {
            "sample_index": self.sample_index,
            "actual_class": self.actual_class,
            "actual_prob": self.actual_prob,
            "predicted_class": self.predicted_class,
            "predicted_prob": self.predicted_prob,
        }


def misclass_records_to_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("sample_id,actual_class,actual_prob,predicted_class,predicted_prob\n")
        for r in records:
            fh.write(f"{r.sample_index},{r.actual_class},{r.actual_prob!r},"
                     f"{r.predicted_class},{r.predicted_prob!r}\n")


@dataclass
class RunResult:
    """Outcome of a single train/test pipeline run."""

    accuracy_pct: float
    confusion: ConfusionMatrix
    misclassified: list[MisclassRecord]
    probabilities: list[ClassProbabilities]

    def to_json_dict(self) -> dict:
        return {
            "accuracy_pct": self.accuracy_pct,
            "confusion": self.confusion.to_json_dict(),
            "misclassified": [r.to_json_dict() for r in self.misclassified],
            "probabilities": [p.to_json_dict() for p in self.probabilities],
        }


def run_pipeline(train: FaultDataset, test: FaultDataset, method_id: str,
                 gpc_config: GpcConfig = GpcConfig(), seed: int = 0,
                 extractor_config: ExtractorConfig = ExtractorConfig(),
                 return_models: bool = False):
    """Fit extractor and ensemble on train only, score on test.

    The extractor never sees test rows; test features come from the fitted
    extractor.  Returns a RunResult (plus the fitted extractor/ensemble when
    return_models is set).
    """
    if len(test) == 0:
        raise ValueError("test set is empty")
    if train.channels != test.channels or train.points_per_channel != test.points_per_channel:
        raise ValueError("train and test layouts differ")
    train.assert_class_coverage(min_per_class=2)

    ss = np.random.SeedSequence(seed)
    ext_seed, gpc_seed = [int(s.generate_state(1)[0]) for s in ss.spawn(2)]
    extractor, feats = extract_features(
        train, method_id, replace(extractor_config, seed=ext_seed))
    ensemble = ovr_train(feats, train.labels, gpc_config, seed=gpc_seed)

    test_feats = extractor.transform(test.samples)
    probs = ensemble.predict_batch(test_feats)
    decisions = np.array([p.decision for p in probs])
    cm = confusion_matrix(decisions, test.labels, train.class_ids)

    records = []
    for i, (p, target) in enumerate(zip(probs, test.labels)):
        target = int(target)
        if p.decision != target:
            records.append(MisclassRecord(
                sample_index=i,
                actual_class=target,
                actual_prob=p.raw[target],
                predicted_class=p.decision,
                predicted_prob=p.raw[p.decision],
            ))
    result = RunResult(cm.accuracy_pct, cm, records, probs)
    if return_models:
        return result, extractor, ensemble
    return result


@dataclass(frozen=True)
class CvConfig:
    """Shared settings for repeated stratified splits."""

    n_runs: int = 5
    n_test_per_class: int = 7
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.n_test_per_class < 1:
            raise ValueError("n_test_per_class must be >= 1")


@dataclass
class CvResult:
    """Per-run accuracies with their mean/std and per-run reports."""

    method_id: str
    accuracies_pct: list[float]
    confusions: list[ConfusionMatrix | None]
    misclassified: list[list[MisclassRecord]]
    failed_runs: list[int] = field(default_factory=list)

    @property
    def mean_pct(self) -> float:
        return float(np.mean(self.accuracies_pct))

    @property
    def std_pct(self) -> float:
        if len(self.accuracies_pct) < 2:
            return 0.0
        return float(np.std(self.accuracies_pct, ddof=1))

    @property
    def all_failed(self) -> bool:
        return len(self.failed_runs) == len(self.accuracies_pct)

    def all_misclass_records(self) -> list[MisclassRecord]:
        return [r for run in self.misclassified for r in run]

    def to_json_dict(self) -> dict:
        return {
            "method_id": self.method_id,
            "accuracies_pct": self.accuracies_pct,
            "mean_pct": self.mean_pct,
            "std_pct": self.std_pct,
            "failed_runs": self.failed_runs,
            "confusions": [c.to_json_dict() if c is not None else None
                           for c in self.confusions],
            "misclassified": [[r.to_json_dict() for r in run]
                              for run in self.misclassified],
        }


def _run_seeds(master_seed: int, n_runs: int) -> list[int]:
    return [int(s.generate_state(1)[0])
            for s in np.random.SeedSequence(master_seed).spawn(n_runs)]


def stratified_cv(dataset: FaultDataset, method_id: str,
                  gpc_config: GpcConfig = GpcConfig(),
                  cv_config: CvConfig = CvConfig(),
                  extractor_config: ExtractorConfig = ExtractorConfig(),
                  strict: bool = True) -> CvResult:
    """Repeated stratified splits, each scored with run_pipeline.

    Split and model seeds derive only from cv_config.seed and the run index,
    so two methods evaluated with the same cv_config see identical splits.
    With strict=False a failing run records accuracy 0 instead of raising.
    """
    run_seeds = _run_seeds(cv_config.seed, cv_config.n_runs)

    def one_run(r: int):
        run_ss = np.random.SeedSequence(run_seeds[r])
        split_seed, model_seed = [int(s.generate_state(1)[0]) for s in run_ss.spawn(2)]
        train, test = stratified_split(dataset, cv_config.n_test_per_class, split_seed)
        return run_pipeline(train, test, method_id, gpc_config, model_seed,
                            extractor_config)

    results: list = [None] * cv_config.n_runs
    if cv_config.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cv_config.n_jobs) as pool:
            futures = {r: pool.submit(one_run, r) for r in range(cv_config.n_runs)}
        outcomes = {r: f for r, f in futures.items()}
    else:
        outcomes = None

    accuracies, confusions, misclassified, failed = [], [], [], []
    for r in range(cv_config.n_runs):
        try:
            res = outcomes[r].result() if outcomes is not None else one_run(r)
        except Exception:
            if strict:
                raise
            log.warning("method %s: run %d failed", method_id, r, exc_info=True)
            accuracies.append(0.0)
            confusions.append(None)
            misclassified.append([])
            failed.append(r)
            continue
        accuracies.append(res.accuracy_pct)
        confusions.append(res.confusion)
        misclassified.append(res.misclassified)
        results[r] = res
    return CvResult(method_id, accuracies, confusions, misclassified, failed)


@dataclass
class GridSearchResult:
    """Cross-validated scores per method and the selected best method."""

    results: dict[str, CvResult]
    best_method: str
    pool: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "pool": list(self.pool),
            "best_method": self.best_method,
            "results": {m: r.to_json_dict() for m, r in self.results.items()},
        }


def grid_search(dataset: FaultDataset, pool=METHOD_POOL,
                gpc_config: GpcConfig = GpcConfig(),
                cv_config: CvConfig = CvConfig(),
                extractor_config: ExtractorConfig = ExtractorConfig()
                ) -> GridSearchResult:
    """Evaluate every method in the pool on identical (paired) CV splits.

    Best method: highest mean accuracy, ties by lower std, then pool order.
    A method failing every run scores 0 and stays in the table flagged.
    """
    pool = tuple(pool)
    if not pool:
        raise ValueError("method pool is empty")

    def eval_method(method: str) -> CvResult:
        log.info("grid search: evaluating %s", method)
        return stratified_cv(dataset, method, gpc_config, cv_config,
                             extractor_config, strict=False)

    if cv_config.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cv_config.n_jobs) as tp:
            futures = {m: tp.submit(eval_method, m) for m in pool}
        results = {m: futures[m].result() for m in pool}
    else:
        results = {m: eval_method(m) for m in pool}

    best = pool[0]
    for m in pool[1:]:
        challenger, incumbent = results[m], results[best]
        if (challenger.mean_pct, -challenger.std_pct) > (incumbent.mean_pct, -incumbent.std_pct):
            best = m
    return GridSearchResult(results, best, pool)


@dataclass
class NoiseLevelResult:
    """CV outcome at one injected-noise level plus misclassification confidence."""

    percent: float
    cv: CvResult
    mean_wrong_class_prob: float  # mean prob assigned to the wrong decision; NaN if none
    n_misclassified: int

    def to_json_dict(self) -> dict:
        wrong = self.mean_wrong_class_prob
        return {
            "percent": self.percent,
            "cv": self.cv.to_json_dict(),
            "mean_wrong_class_prob": None if np.isnan(wrong) else wrong,
            "n_misclassified": self.n_misclassified,
        }


def noise_sweep(dataset: FaultDataset, percents, method_id: str,
                gpc_config: GpcConfig = GpcConfig(),
                cv_config: CvConfig = CvConfig(),
                seed: int = 0,
                extractor_config: ExtractorConfig = ExtractorConfig()
                ) -> dict[float, NoiseLevelResult]:
    """Cross-validate at each injected-noise level.

    Every level reuses cv_config's split seeds (paired comparison); the 0%
    entry therefore equals a plain stratified_cv of the input.  Each level
    also reports the mean probability assigned to the wrong class over all
    misclassified samples.
    """
    percents = [float(p) for p in percents]
    if any(p < 0 for p in percents):
        raise ValueError("noise percents must be >= 0")
    noise_seeds = _run_seeds(seed, max(len(percents), 1))
    out: dict[float, NoiseLevelResult] = {}
    for i, pct in enumerate(percents):
        noisy = inject_noise(dataset, pct, noise_seeds[i])
        cv = stratified_cv(noisy, method_id, gpc_config, cv_config,
                           extractor_config, strict=False)
        records = cv.all_misclass_records()
        wrong = (float(np.mean([r.predicted_prob for r in records]))
                 if records else float("nan"))
        out[pct] = NoiseLevelResult(pct, cv, wrong, len(records))
    return out
