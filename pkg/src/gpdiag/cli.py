"""Command-line front end.

Subcommands: synth, ingest, train, diagnose, gridsearch, noise-sweep,
evaluate.  Runs are driven by a JSON config document; --seed and --out
override the corresponding config fields.  All outputs are deterministic for
a fixed (config, seed) and embed the config hash and seed; progress goes to
stderr.  Exit codes: 0 success, 1 user error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .evaluation import (CvConfig, grid_search, misclass_records_to_csv,
                         noise_sweep, run_pipeline)
from .exceptions import NumericalError
from .extraction import METHOD_POOL, ExtractorConfig, FeatureExtractor
from .jsonio import config_hash, write_json_atomic
from .multiclass import OvrEnsemble
from .optimize import GpcConfig
from .signals import (FaultDataset, SynthSpec, dataset_from_manifest,
                      load_record, stratified_split, synth_dataset)

log = logging.getLogger("gpdiag")


class UserError(Exception):
    """Bad input from the operator: config, flags, files."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UserError(message)


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UserError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UserError(f"{path}: malformed JSON ({exc})") from exc


class RunConfig:
    """Resolved run settings: dataset source, model knobs, seeds, outputs."""

    def __init__(self, doc: dict):
        self.doc = doc
        self.seed = int(doc.get("seed", 0))
        self.out = doc.get("out", ".")
        self.fusion = doc.get("fusion", "concat")
        self.method = doc.get("method", "kpca-gaussian")
        self.pool = tuple(doc.get("pool", METHOD_POOL))
        self.noise_percents = [float(p) for p in doc.get("noise_percents", [0, 5, 10])]
        self.gpc = GpcConfig.from_json_dict(doc.get("gpc", {}))
        ext = doc.get("extractor", {})
        self.extractor = ExtractorConfig(
            n_components=int(ext.get("n_components", 10)),
            kpca_sigma=ext.get("kpca_sigma"),
            kpca_poly_a=float(ext.get("kpca_poly_a", 1.0)),
            kpca_poly_b=float(ext.get("kpca_poly_b", 3.0)),
            sae_hidden=tuple(ext.get("sae_hidden", (100, 10))),
            sae_learning_rate=float(ext.get("sae_learning_rate", 1e-3)),
            sae_momentum=float(ext.get("sae_momentum", 0.9)),
            sae_epochs=int(ext.get("sae_epochs", 500)),
        )
        cv = doc.get("cv", {})
        self.cv_runs = int(cv.get("n_runs", 5))
        self.cv_test_per_class = int(cv.get("n_test_per_class", 7))

    def cv_config(self, threads: int) -> CvConfig:
        return CvConfig(n_runs=self.cv_runs,
                        n_test_per_class=self.cv_test_per_class,
                        seed=self.seed, n_jobs=threads)

    def provenance(self) -> dict:
        return {"config_sha256": config_hash(self.doc), "seed": self.seed}

    def load_dataset(self) -> FaultDataset:
        src = self.doc.get("dataset")
        if not isinstance(src, dict):
            raise UserError('config needs a "dataset" object '
                            '({"manifest": path} or {"synth": spec})')
        if "manifest" in src:
            dataset = dataset_from_manifest(src["manifest"], fusion="concat")
        elif "synth" in src:
            dataset = synth_dataset(SynthSpec.from_json_dict(src["synth"]), self.seed)
        else:
            raise UserError('dataset source must provide "manifest" or "synth"')
        if self.fusion != "concat":
            if self.fusion not in dataset.channels:
                raise UserError(f"fusion {self.fusion!r} is neither 'concat' "
                                f"nor a channel in {dataset.channels}")
            dataset = dataset.select_channels((self.fusion,))
        return dataset


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["out"] = args.out
    return doc


def _outdir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_signal_csv(path: Path, values: np.ndarray) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for v in values:
            fh.write(f"{v!r}\n")
    tmp.replace(path)


def cmd_synth(args) -> int:
    spec = SynthSpec.from_json_dict(_load_json(args.spec))
    seed = args.seed if args.seed is not None else 0
    out = Path(args.out if args.out is not None else ".")
    (out / "signals").mkdir(parents=True, exist_ok=True)
    dataset = synth_dataset(spec, seed)

    classes = []
    for cid in dataset.class_ids:
        rows = dataset.samples[dataset.labels == cid]
        files = {}
        for ch in dataset.channels:
            sl = dataset.channel_slice(ch)
            flat = rows[:, sl].reshape(-1)
            name = f"signals/class{cid}_{ch}.{'csv' if args.format == 'csv' else 'raw'}"
            fpath = out / name
            if args.format == "csv":
                _write_signal_csv(fpath, flat)
            else:
                tmp = fpath.with_name(fpath.name + ".tmp")
                tmp.write_bytes(flat.astype("<f8").tobytes())
                tmp.replace(fpath)
            files[ch] = name
        classes.append({"id": cid, "label": dataset.class_map[cid], "files": files})

    manifest = {
        "classes": classes,
        "sampling_rate_hz": spec.sampling_rate_hz,
        "points_per_sample": spec.points_per_channel,
        "samples_per_class": spec.samples_per_class,
        "format": "csv" if args.format == "csv" else "raw-f64-le",
    }
    provenance = {"config_sha256": config_hash(spec.to_json_dict()), "seed": seed}
    write_json_atomic(out / "manifest.json", manifest, provenance)
    log.info("wrote %s and %d signal files", out / "manifest.json",
             len(classes) * dataset.n_channels)
    return 0


def cmd_ingest(args) -> int:
    fusion = "concat" if args.fusion == "concat" else "single"
    channel = None if args.fusion == "concat" else args.fusion
    dataset = dataset_from_manifest(args.manifest, fusion=fusion, channel=channel)
    report = {
        "n_samples": len(dataset),
        "n_channels": dataset.n_channels,
        "channels": list(dataset.channels),
        "points_per_channel": dataset.points_per_channel,
        "class_counts": {str(c): n for c, n in dataset.class_counts().items()},
        "class_map": {str(c): v for c, v in dataset.class_map.items()},
    }
    out = Path(args.out if args.out is not None else ".")
    out.mkdir(parents=True, exist_ok=True)
    write_json_atomic(out / "ingest_report.json", report,
                      {"config_sha256": config_hash({"manifest": str(args.manifest)}),
                       "seed": 0})
    log.info("ingested %d samples across %d classes", len(dataset),
             len(dataset.class_map))
    return 0


def _split_for_config(config: RunConfig, dataset: FaultDataset):
    split_seed = int(np.random.SeedSequence(config.seed).generate_state(1)[0])
    return stratified_split(dataset, config.cv_test_per_class, split_seed)


def cmd_train(args) -> int:
    config = RunConfig(_apply_overrides(_load_json(args.config), args))
    out = _outdir(config)
    dataset = config.load_dataset()
    train, test = _split_for_config(config, dataset)
    log.info("training on %d samples, testing on %d (method %s)",
             len(train), len(test), config.method)
    result, extractor, ensemble = run_pipeline(
        train, test, config.method, config.gpc, config.seed,
        config.extractor, return_models=True)
    prov = config.provenance()
    write_json_atomic(out / "model.json", ensemble.to_json_dict(), prov)
    write_json_atomic(out / "extractor.json", extractor.to_json_dict(), prov)
    write_json_atomic(out / "evaluation.json", result.to_json_dict(), prov)
    result.confusion.to_csv(out / "confusion.csv")
    misclass_records_to_csv(result.misclassified, out / "misclassified.csv")
    log.info("test accuracy %.1f%%; artifacts in %s", result.accuracy_pct, out)
    return 0


def cmd_evaluate(args) -> int:
    config = RunConfig(_apply_overrides(_load_json(args.config), args))
    out = _outdir(config)
    dataset = config.load_dataset()
    train, test = _split_for_config(config, dataset)
    result = run_pipeline(train, test, config.method, config.gpc, config.seed,
                          config.extractor)
    write_json_atomic(out / "evaluation.json", result.to_json_dict(),
                      config.provenance())
    result.confusion.to_csv(out / "confusion.csv")
    misclass_records_to_csv(result.misclassified, out / "misclassified.csv")
    log.info("accuracy %.1f%% (%d/%d misclassified)", result.accuracy_pct,
             len(result.misclassified), len(test))
    return 0


def cmd_diagnose(args) -> int:
    extractor = FeatureExtractor.from_json_dict(_load_json(args.extractor))
    ensemble = OvrEnsemble.from_json_dict(_load_json(args.model))
    record = load_record(args.input, fmt=args.format, sampling_rate_hz=1.0,
                         channel_id="input")
    expected = len(extractor.channels) * extractor.points_per_channel
    if len(record) != expected:
        raise UserError(
            f"input sample has {len(record)} values; extractor expects {expected} "
            f"({len(extractor.channels)} channels x {extractor.points_per_channel})"
        )
    features = extractor.transform_one(record.samples)
    result = ensemble.predict(features).to_json_dict()
    text = json.dumps(result, sort_keys=True, indent=2)
    print(text)
    if args.out is not None:
        outpath = Path(args.out)
        if outpath.suffix:  # a file path, not a directory
            outpath.parent.mkdir(parents=True, exist_ok=True)
            write_json_atomic(outpath, result)
        else:
            outpath.mkdir(parents=True, exist_ok=True)
            write_json_atomic(outpath / "diagnosis.json", result)
    return 0


def cmd_gridsearch(args) -> int:
    config = RunConfig(_apply_overrides(_load_json(args.config), args))
    out = _outdir(config)
    dataset = config.load_dataset()
    result = grid_search(dataset, config.pool, config.gpc,
                         config.cv_config(args.threads), config.extractor)
    write_json_atomic(out / "gridsearch.json", result.to_json_dict(),
                      config.provenance())
    log.info("best method: %s (%.1f%% mean accuracy)", result.best_method,
             result.results[result.best_method].mean_pct)
    return 0


def cmd_noise_sweep(args) -> int:
    config = RunConfig(_apply_overrides(_load_json(args.config), args))
    out = _outdir(config)
    dataset = config.load_dataset()
    sweep = noise_sweep(dataset, config.noise_percents, config.method,
                        config.gpc, config.cv_config(args.threads),
                        seed=config.seed, extractor_config=config.extractor)
    doc = {"levels": [res.to_json_dict() for _, res in sorted(sweep.items())]}
    write_json_atomic(out / "noise_sweep.json", doc, config.provenance())
    for pct, res in sorted(sweep.items()):
        log.info("noise %g%%: mean accuracy %.1f%%", pct, res.cv.mean_pct)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="gpdiag",
                     description="Probabilistic bearing-fault diagnosis toolkit")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel workers for CV runs / grid cells")

    p = sub.add_parser("synth", help="generate a synthetic dataset + manifest")
    p.add_argument("--spec", required=True, help="SynthSpec JSON file")
    p.add_argument("--format", choices=["csv", "raw-f64-le"], default="csv")
    add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate a manifest and report its contents")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fusion", default="concat",
                   help='"concat" or a single channel name')
    add_common(p)
    p.set_defaults(func=cmd_ingest)

    for name, func, help_text in [
        ("train", cmd_train, "fit extractor + ensemble, save model artifacts"),
        ("evaluate", cmd_evaluate, "single split evaluation with reports"),
        ("gridsearch", cmd_gridsearch, "cross-validated method-pool search"),
        ("noise-sweep", cmd_noise_sweep, "accuracy vs injected noise level"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run config JSON")
        add_common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("diagnose", help="classify one raw sample file")
    p.add_argument("--model", required=True, help="model.json from train")
    p.add_argument("--extractor", required=True, help="extractor.json from train")
    p.add_argument("--input", required=True, help="sample file (fused layout)")
    p.add_argument("--format", choices=["csv", "raw-f64-le"], default="csv")
    add_common(p)
    p.set_defaults(func=cmd_diagnose)

    return parser


def run(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        return args.func(args)
    except UserError as exc:
        log.error("%s", exc)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        log.error("%s", exc)
        return 1
    except (NumericalError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
