"""Experiment pipeline behind the CLI.

Wires datasets -> preprocessing -> classifiers -> fusion -> evaluation
into reproducible runs. Every command echoes its full configuration
into a manifest along with sha256 hashes of the artifacts it wrote;
nothing in an artifact depends on wall-clock time, so identical
configurations rerun to byte-identical outputs.
"""

from __future__ import annotations

import copy
import hashlib
import json
import time
from pathlib import Path

import numpy as np

from fusekit import classifiers as clf
from fusekit import datasets as ds
from fusekit import evaluation as ev
from fusekit import fusion as fu
from fusekit import preprocessing as pp
from fusekit import synthetic as syn
from fusekit.errors import (
    IntegrityError,
    InvalidConfigError,
    ShapeError,
)
from fusekit.kernels import available_backends

CLASSIFIER_KINDS = ("softmax", "naive_bayes", "mlp")

DEFAULT_CLASSIFIERS = (
    {"kind": "softmax", "learning_rate": 0.2, "epochs": 300},
    {"kind": "naive_bayes"},
    {"kind": "mlp", "learning_rate": 0.15, "epochs": 400, "hidden_units": 48},
)

DEFAULT_CONFIG = {
    "seed": 42,
    "out": "run",
    "backend": None,
    "dataset": {"kind": "synthetic", "root": "", "split": "fractional", "flavor": "ucihar"},
    "split": {"train_fraction": 0.7, "validation_fraction_of_train": 0.10, "stratified": True},
    "classifiers": list(DEFAULT_CLASSIFIERS),
    "entropy": {
        "alpha": 2.0,
        "tau": 0.1,
        "variant": "tsallis",
        "column_mode": "normalized",
        "fallback_uniform": False,
    },
    "methods": ["sum", "weighted", "entropy"],
    "renormalize": False,
    "reference": None,
}

METHOD_DISPLAY = {
    "sum": "Score Fusion",
    "weighted": "Weighted Score Fusion",
    "entropy": "Entropy Weighted Score Fusion",
}


def _deep_merge(base, override):
    """Dict-on-dict merge; lists and scalars replace wholesale."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_method(method: str):
    """Split a method string into (slug, display name, subset names).

    Plain methods are 'sum', 'weighted', 'entropy'; a subset fusion is
    written 'entropy-subset:nameA,nameB'.
    """
    method = method.strip()
    if method in METHOD_DISPLAY:
        return method, METHOD_DISPLAY[method], None
    if method.startswith("entropy-subset:"):
        names = [n.strip() for n in method.split(":", 1)[1].split(",") if n.strip()]
        if len(names) < 2:
            raise InvalidConfigError(
                f"entropy-subset needs at least 2 classifier names, got {method!r}"
            )
        slug = "entropy_subset_" + "_".join(names)
        display = "Entropy Weighted Score Fusion (" + " + ".join(names) + ")"
        return slug, display, names
    raise InvalidConfigError(
        f"unknown fusion method {method!r}; expected sum, weighted, entropy, "
        "or entropy-subset:<name,name,...>"
    )


def normalize_config(raw=None):
    """Merge user config over the defaults and validate the result."""
    config = _deep_merge(DEFAULT_CONFIG, raw or {})
    if not isinstance(config["seed"], int) or config["seed"] < 0:
        raise InvalidConfigError("seed must be a non-negative integer")
    if config["backend"] not in (None, "pure", "compiled"):
        raise InvalidConfigError("backend must be null, 'pure', or 'compiled'")
    kind = config["dataset"].get("kind")
    if kind not in ds.DATASET_KINDS:
        raise InvalidConfigError(
            f"unknown dataset kind {kind!r}; expected one of {ds.DATASET_KINDS}"
        )
    if not isinstance(config["classifiers"], list) or not config["classifiers"]:
        raise InvalidConfigError("at least one classifier must be configured")
    seen = set()
    for entry in config["classifiers"]:
        if not isinstance(entry, dict) or entry.get("kind") not in CLASSIFIER_KINDS:
            raise InvalidConfigError(
                f"each classifier needs a kind from {CLASSIFIER_KINDS}, got {entry!r}"
            )
        name = classifier_name(entry, seen)
        seen.add(name)
    if not isinstance(config["methods"], list) or not config["methods"]:
        raise InvalidConfigError("at least one fusion method must be configured")
    for method in config["methods"]:
        _, _, subset = parse_method(method)
        if subset:
            for name in subset:
                if name not in seen:
                    raise InvalidConfigError(
                        f"entropy-subset names {subset} must resolve to configured "
                        f"classifiers {sorted(seen)}"
                    )
    if config["reference"] is not None and config["reference"] not in ev.REFERENCE_RESULTS:
        raise InvalidConfigError(
            f"reference must be one of {tuple(ev.REFERENCE_RESULTS)} or null"
        )
    entropy_config(config)  # validates the entropy block
    return config


def classifier_name(entry, taken):
    """Stable unique name for a classifier entry: its kind, suffixed on
    repeats ('softmax', 'softmax_2', ...). An explicit 'name' wins."""
    if "name" in entry:
        name = str(entry["name"])
        if name in taken:
            raise InvalidConfigError(f"duplicate classifier name {name!r}")
        return name
    base = entry["kind"]
    if base not in taken:
        return base
    i = 2
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def entropy_config(config) -> fu.EntropyConfig:
    block = config["entropy"]
    extra = set(block) - {"alpha", "tau", "variant", "column_mode", "fallback_uniform"}
    if extra:
        raise InvalidConfigError(f"unknown entropy config fields: {sorted(extra)}")
    return fu.EntropyConfig(
        alpha=float(block["alpha"]),
        tau=float(block["tau"]),
        variant=block["variant"],
        column_mode=block["column_mode"],
    )


def train_config(entry, default_seed) -> clf.TrainConfig:
    fields = {
        k: v for k, v in entry.items() if k not in ("kind", "name")
    }
    fields.setdefault("seed", default_seed)
    try:
        return clf.TrainConfig(**fields)
    except TypeError as exc:
        raise InvalidConfigError(f"bad classifier options for {entry!r}: {exc}") from exc


def _split_spec(config) -> ds.SplitSpec:
    block = config["split"]
    return ds.SplitSpec(
        train_fraction=float(block["train_fraction"]),
        validation_fraction_of_train=float(block["validation_fraction_of_train"]),
        seed=int(block.get("seed", config["seed"])),
        stratified=bool(block["stratified"]),
    )


def _inertial_features(windows):
    """Summarize each 9 x w window as per-channel mean, stddev, RMS.

    The published pipeline fed raw windows to deep networks; those are
    out of scope here, so the inertial variant reduces to 27 summary
    features per window.
    """
    rows = []
    for win in windows:
        v = win.values
        rows.append(
            np.concatenate(
                [v.mean(axis=1), v.std(axis=1), np.sqrt((v * v).mean(axis=1))]
            )
        )
    return np.array(rows, dtype=np.float64)


def _standardized_views(features, labels, class_names, spec: ds.SplitSpec):
    """Split one feature matrix and z-score it on its training rows."""
    train_idx, val_idx, test_idx = ds.split_indices(labels, spec)
    train_x, means, stds = pp.zscore_fit_transform(features[train_idx])

    def part(idx):
        return clf.LabeledDataset(
            features=pp.zscore_apply(features[idx], means, stds),
            labels=labels[idx],
            class_names=class_names,
        )

    train = clf.LabeledDataset(
        features=train_x, labels=labels[train_idx], class_names=class_names
    )
    return train, part(val_idx), part(test_idx)


def _paper_split_views(train_data, test_data, config):
    """Fixed archive split; validation carved out of the archive train."""
    vf = float(config["split"]["validation_fraction_of_train"])
    seed = int(config["split"].get("seed", config["seed"]))
    kept, carved = ds.carve_fraction(
        train_data.labels, vf, seed, stratified=bool(config["split"]["stratified"])
    )
    train_x, means, stds = pp.zscore_fit_transform(train_data.features[kept])
    train = clf.LabeledDataset(
        features=train_x,
        labels=train_data.labels[kept],
        class_names=train_data.class_names,
    )
    val = clf.LabeledDataset(
        features=pp.zscore_apply(train_data.features[carved], means, stds),
        labels=train_data.labels[carved],
        class_names=train_data.class_names,
    )
    test = clf.LabeledDataset(
        features=pp.zscore_apply(test_data.features, means, stds),
        labels=test_data.labels,
        class_names=test_data.class_names,
    )
    return train, val, test


WISDM_WINDOW = 200  # 10 s at 20 Hz
WISDM_OVERLAP = 0.5


def load_experiment_data(config):
    """Resolve the dataset descriptor into per-classifier splits.

    Returns (views, class_names, reference_name) where views maps each
    configured classifier name to its (train, validation, test)
    datasets. Only the synthetic kind differs per classifier (noise
    tiers); file-backed datasets give every classifier the same splits.
    """
    dcfg = config["dataset"]
    kind = dcfg["kind"]
    spec = _split_spec(config)
    names = []
    taken = set()
    for entry in config["classifiers"]:
        name = classifier_name(entry, taken)
        taken.add(name)
        names.append(name)

    if kind == "synthetic":
        flavor = dcfg.get("flavor", "ucihar")
        if flavor not in ("ucihar", "wisdm"):
            raise InvalidConfigError("synthetic flavor must be 'ucihar' or 'wisdm'")
        base = synthetic_dataset(dcfg, config["seed"])
        tier_views = syn.classifier_views(base, seed=int(dcfg.get("seed", config["seed"])))
        train_idx, val_idx, test_idx = ds.split_indices(base.labels, spec)
        views = {}
        for name, entry in zip(names, config["classifiers"]):
            view = tier_views.get(entry["kind"], base)
            train_x, means, stds = pp.zscore_fit_transform(view.features[train_idx])
            views[name] = (
                clf.LabeledDataset(
                    features=train_x,
                    labels=view.labels[train_idx],
                    class_names=view.class_names,
                ),
                clf.LabeledDataset(
                    features=pp.zscore_apply(view.features[val_idx], means, stds),
                    labels=view.labels[val_idx],
                    class_names=view.class_names,
                ),
                clf.LabeledDataset(
                    features=pp.zscore_apply(view.features[test_idx], means, stds),
                    labels=view.labels[test_idx],
                    class_names=view.class_names,
                ),
            )
        reference = "UCI-HAR" if flavor == "ucihar" else "WISDM"
        return views, base.class_names, reference

    if kind == "ucihar_features":
        if dcfg.get("split", "paper") == "paper":
            train_data = ds.load_ucihar(dcfg["root"], "features", "train")
            test_data = ds.load_ucihar(dcfg["root"], "features", "test")
            shared = _paper_split_views(train_data, test_data, config)
            class_names = train_data.class_names
        else:
            data = ds.load_ucihar(dcfg["root"], "features", "train")
            shared = _standardized_views(data.features, data.labels, data.class_names, spec)
            class_names = data.class_names
        reference = "UCI-HAR"
    elif kind == "ucihar_inertial":
        if dcfg.get("split", "paper") == "paper":
            tr_w, tr_y, class_names = ds.load_ucihar(dcfg["root"], "inertial", "train")
            te_w, te_y, _ = ds.load_ucihar(dcfg["root"], "inertial", "test")
            train_data = clf.LabeledDataset(
                features=_inertial_features(tr_w), labels=tr_y, class_names=class_names
            )
            test_data = clf.LabeledDataset(
                features=_inertial_features(te_w), labels=te_y, class_names=class_names
            )
            shared = _paper_split_views(train_data, test_data, config)
        else:
            tr_w, tr_y, class_names = ds.load_ucihar(dcfg["root"], "inertial", "train")
            shared = _standardized_views(_inertial_features(tr_w), tr_y, class_names, spec)
        reference = "UCI-HAR"
    elif kind == "wisdm_raw":
        raw = ds.load_wisdm_raw(dcfg["root"])
        segments = pp.sliding_windows(raw.xyz, raw.labels, WISDM_WINDOW, WISDM_OVERLAP)
        if not segments:
            raise IntegrityError("stream too short: no usable windows")
        features = np.array(
            [pp.extract_wisdm_features(values) for values, _ in segments]
        )
        labels = np.array([label for _, label in segments], dtype=np.int64)
        shared = _standardized_views(features, labels, raw.class_names, spec)
        class_names = raw.class_names
        reference = "WISDM"
    elif kind == "wisdm_arff":
        arff = ds.load_wisdm_arff(dcfg["root"])
        train_idx, val_idx, test_idx = ds.split_indices(arff.labels, spec)
        imputed, _ = ds.mean_impute(arff.features, train_idx)
        train_x, means, stds = pp.zscore_fit_transform(imputed[train_idx])
        shared = (
            clf.LabeledDataset(
                features=train_x,
                labels=arff.labels[train_idx],
                class_names=arff.class_names,
            ),
            clf.LabeledDataset(
                features=pp.zscore_apply(imputed[val_idx], means, stds),
                labels=arff.labels[val_idx],
                class_names=arff.class_names,
            ),
            clf.LabeledDataset(
                features=pp.zscore_apply(imputed[test_idx], means, stds),
                labels=arff.labels[test_idx],
                class_names=arff.class_names,
            ),
        )
        class_names = arff.class_names
        reference = "WISDM"
    else:
        raise InvalidConfigError(f"dataset kind {kind!r} cannot be trained on")

    views = {name: shared for name in names}
    return views, class_names, reference


def synthetic_dataset(dcfg, default_seed) -> clf.LabeledDataset:
    return syn.synthetic_base(
        n_samples=int(dcfg.get("n_samples", syn.SYNTH_SAMPLES)),
        n_features=int(dcfg.get("n_features", syn.SYNTH_FEATURES)),
        n_classes=int(dcfg.get("n_classes", len(syn.SYNTH_CLASS_NAMES))),
        seed=int(dcfg.get("seed", default_seed)),
        separation=float(dcfg.get("separation", syn.SYNTH_SEPARATION)),
        mixing=float(dcfg.get("mixing", syn.SYNTH_MIXING)),
    )


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, config, artifacts, extra=None):
    """Write manifest_<command>.json: config echo, seed, artifact hashes.

    No timestamps or absolute paths, so a rerun with the same config
    rewrites the same bytes.
    """
    payload = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "artifacts": {rel: _sha256(out_dir / rel) for rel in sorted(artifacts)},
    }
    if extra:
        payload.update(extra)
    path = out_dir / f"manifest_{command}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(run_dir: Path, command: str):
    path = Path(run_dir) / f"manifest_{command}.json"
    if not path.is_file():
        raise InvalidConfigError(
            f"{run_dir} has no manifest_{command}.json; run '{command}' first "
            "or pass explicit score files"
        )
    return json.loads(path.read_text(encoding="utf-8"))


def cmd_train(config, log=print):
    """Train every configured classifier; write models, test-split
    scores CSVs, a validation report, and the manifest."""
    config = normalize_config(config)
    out_dir = Path(config["out"])
    (out_dir / "models").mkdir(parents=True, exist_ok=True)
    (out_dir / "scores").mkdir(parents=True, exist_ok=True)
    views, class_names, reference = load_experiment_data(config)
    artifacts = []
    validation_accuracy = {}
    scores_files = {}
    lines = ["validation accuracy (carved from the training split):"]
    for name, entry in zip(views, config["classifiers"]):
        train_data, val_data, test_data = views[name]
        tconf = train_config(entry, config["seed"])
        validation = (
            (val_data.features, val_data.labels) if val_data.n > 0 else None
        )
        model = clf.train(entry["kind"], train_data, tconf, validation=validation)
        model_rel = f"models/{name}.fkm"
        clf.save_model(model, out_dir / model_rel)
        scores = clf.predict_proba(model, test_data.features)
        scores_rel = f"scores/{name}.csv"
        ds.save_scores_csv(scores, test_data.labels, out_dir / scores_rel)
        artifacts += [model_rel, scores_rel]
        validation_accuracy[name] = model.validation_accuracy
        scores_files[name] = scores_rel
        lines.append(f"  {name}: {100.0 * model.validation_accuracy:.1f}%")
        log(f"trained {name} ({entry['kind']}): validation accuracy "
            f"{100.0 * model.validation_accuracy:.1f}%")
    report_rel = "validation.txt"
    (out_dir / report_rel).write_text("\n".join(lines) + "\n", encoding="utf-8")
    artifacts.append(report_rel)
    manifest = write_manifest(
        out_dir,
        "train",
        config,
        artifacts,
        extra={
            "class_names": list(class_names),
            "reference": config["reference"] or reference,
            "scores_files": scores_files,
            "validation_accuracy": validation_accuracy,
        },
    )
    return manifest


def _load_scores_for_fusion(config, run_dir, scores_paths):
    """Resolve fusion inputs to (names, matrices, labels, extras)."""
    renormalize = bool(config.get("renormalize", False))
    if run_dir is not None:
        manifest = read_manifest(run_dir, "train")
        scores_files = manifest["scores_files"]
        names = list(scores_files)
        paths = [Path(run_dir) / rel for rel in scores_files.values()]
        extras = {
            "validation_accuracy": manifest.get("validation_accuracy", {}),
            "class_names": manifest.get("class_names"),
            "reference": manifest.get("reference"),
        }
    elif scores_paths:
        paths = [Path(p) for p in scores_paths]
        names = []
        for p in paths:
            stem = p.stem
            name = stem
            i = 2
            while name in names:
                name = f"{stem}_{i}"
                i += 1
            names.append(name)
        extras = {"validation_accuracy": {}, "class_names": None, "reference": None}
    else:
        raise InvalidConfigError("fuse needs a run directory or >= 2 score files")
    if len(paths) < 2:
        raise InvalidConfigError(
            f"fusion needs at least 2 score files, got {len(paths)}"
        )
    matrices, labels = [], None
    for name, path in zip(names, paths):
        matrix, file_labels = ds.load_scores_csv(path, renormalize=renormalize)
        if matrices:
            if matrix.shape != matrices[0].shape:
                raise ShapeError(
                    f"{paths[0]} has shape {matrices[0].shape} but {path} "
                    f"has {matrix.shape}"
                )
            if not np.array_equal(labels, file_labels):
                raise IntegrityError(
                    f"label column of {path} disagrees with {paths[0]}"
                )
        matrices.append(matrix)
        labels = file_labels
    return names, matrices, labels, extras


def _weighted_weights(names, validation_accuracy):
    """Fixed fusion weights from validation accuracies, normalized to
    sum 1; uniform when no accuracies are on record."""
    accs = [validation_accuracy.get(n) for n in names]
    if any(a is None for a in accs):
        return [1.0 / len(names)] * len(names)
    total = sum(accs)
    if total <= 0:
        return [1.0 / len(names)] * len(names)
    return [a / total for a in accs]


def cmd_fuse(config, run_dir=None, scores_paths=None, log=print):
    """Fuse classifier scores with every configured method."""
    config = normalize_config(config)
    if run_dir is None and not scores_paths:
        run_dir = config["out"]
    names, matrices, labels, extras = _load_scores_for_fusion(
        config, run_dir, scores_paths
    )
    econf = entropy_config(config)
    backend = config["backend"]
    out_dir = Path(run_dir) if run_dir is not None else Path(config["out"])
    (out_dir / "fused").mkdir(parents=True, exist_ok=True)
    class_names = extras["class_names"] or list(matrices[0].class_names)
    artifacts = []
    fusion_meta = {}
    report_lines = []
    for method in config["methods"]:
        slug, display, subset = parse_method(method)
        if subset:
            missing = [n for n in subset if n not in names]
            if missing:
                raise InvalidConfigError(
                    f"entropy-subset names {missing} not among inputs {names}"
                )
            chosen = [names.index(n) for n in subset]
        else:
            chosen = list(range(len(names)))
        used_names = [names[i] for i in chosen]
        used = [matrices[i] for i in chosen]
        if method == "sum":
            decision = fu.sum_fusion(used, backend=backend)
            weights = [1.0] * len(used)
            weight_note = "unit weights"
        elif method == "weighted":
            weights = _weighted_weights(used_names, extras["validation_accuracy"])
            decision = fu.weighted_sum_fusion(used, weights, backend=backend)
            weight_note = "validation-accuracy weights"
        else:
            decision, fw = fu.entropy_weighted_fusion(
                used,
                econf,
                fallback_uniform=bool(config["entropy"]["fallback_uniform"]),
                backend=backend,
            )
            weights = fw.weights.tolist()
            weight_note = (
                f"entropy weights (variant={econf.variant}, alpha={econf.alpha}, "
                f"tau={econf.tau}, column_mode={econf.column_mode}); totals "
                + ", ".join(f"{n}={float(e)!r}" for n, e in zip(used_names, fw.entropies))
            )
        rel = f"fused/{slug}.csv"
        ds.save_scores_csv(decision.fused_scores, labels, out_dir / rel, class_names)
        artifacts.append(rel)
        fusion_meta[method] = {
            "slug": slug,
            "display": display,
            "inputs": used_names,
            "weights": {n: w for n, w in zip(used_names, weights)},
        }
        line = f"{display}: " + ", ".join(
            f"{n}={w:.6f}" for n, w in zip(used_names, weights)
        )
        report_lines.append(line)
        report_lines.append(f"  ({weight_note})")
        log(line)
    weights_rel = "fused/weights.txt"
    (out_dir / weights_rel).write_text("\n".join(report_lines) + "\n", encoding="utf-8")
    artifacts.append(weights_rel)
    manifest = write_manifest(
        out_dir,
        "fuse",
        config,
        artifacts,
        extra={
            "fusions": fusion_meta,
            "inputs": names,
            "class_names": class_names,
            "reference": extras["reference"],
        },
    )
    return manifest


def cmd_evaluate(config, run_dir=None, scores_paths=None, log=print):
    """Evaluate individual and fused scores; write per-method reports
    and the aggregate comparison table."""
    config = normalize_config(config)
    if run_dir is None and not scores_paths:
        run_dir = config["out"]
    to_evaluate = []  # (slug, display, path, weights)
    reference_name = config["reference"]
    class_names = None
    if run_dir is not None:
        run_dir = Path(run_dir)
        train_manifest = read_manifest(run_dir, "train")
        class_names = train_manifest.get("class_names")
        reference_name = reference_name or train_manifest.get("reference")
        for name, rel in train_manifest["scores_files"].items():
            to_evaluate.append((name, name, run_dir / rel, None))
        try:
            fuse_manifest = read_manifest(run_dir, "fuse")
        except InvalidConfigError:
            fuse_manifest = None
        if fuse_manifest:
            for meta in fuse_manifest["fusions"].values():
                weights = tuple(meta["weights"].values())
                to_evaluate.append(
                    (meta["slug"], meta["display"], run_dir / f"fused/{meta['slug']}.csv", weights)
                )
        out_dir = run_dir
    else:
        for p in scores_paths:
            p = Path(p)
            to_evaluate.append((p.stem, p.stem, p, None))
        out_dir = Path(config["out"])
    if not to_evaluate:
        raise InvalidConfigError("nothing to evaluate")
    (out_dir / "reports").mkdir(parents=True, exist_ok=True)
    spec = _split_spec(config)
    config_echo = {
        "alpha": config["entropy"]["alpha"],
        "tau": config["entropy"]["tau"],
        "column_mode": config["entropy"]["column_mode"],
        "seed": config["seed"],
        "split": f"{spec.train_fraction}/{spec.validation_fraction_of_train}"
        f"/stratified={spec.stratified}",
    }
    artifacts = []
    reports = []
    accuracies = {}
    for slug, display, path, weights in to_evaluate:
        values, labels, file_class_names = ds.read_scores_file(path)
        predicted = fu.argmax_labels(values)
        names = class_names or list(file_class_names)
        report = ev.evaluate_predictions(
            display, labels, predicted, names, weights=weights, config=config_echo
        )
        reports.append(report)
        accuracies[display] = report.accuracy
        text_rel = f"reports/{slug}.txt"
        (out_dir / text_rel).write_text(ev.render_report(report), encoding="utf-8")
        confusion_rel = f"reports/{slug}_confusion.csv"
        (out_dir / confusion_rel).write_text(
            ev.confusion_csv(report.confusion), encoding="utf-8"
        )
        artifacts += [text_rel, confusion_rel]
        log(f"{display}: accuracy {report.accuracy:.1f}%, macro F1 {report.macro_f1:.1f}%")
    dataset_label = reference_name or "results"
    reference = None
    if reference_name in ev.REFERENCE_RESULTS:
        reference = {
            f"{reference_name} (published full-scale)": ev.REFERENCE_RESULTS[reference_name]
        }
    text, csv_text = ev.comparison_table({dataset_label: reports}, reference=reference)
    (out_dir / "comparison.txt").write_text(text, encoding="utf-8")
    (out_dir / "comparison.csv").write_text(csv_text, encoding="utf-8")
    artifacts += ["comparison.txt", "comparison.csv"]
    log("\n" + text)
    manifest = write_manifest(
        out_dir, "evaluate", config, artifacts, extra={"accuracy": accuracies}
    )
    return manifest


BENCH_DEFAULT_D = (1_000, 10_000, 100_000, 1_000_000)
BENCH_DEFAULT_C = (6, 20)
BENCH_DEFAULT_J = (2, 3, 5)


def _bench_cell(kern_name, d, c, j, econf, repeats, rng):
    raw = rng.random((j, d, c))
    raw /= raw.sum(axis=2, keepdims=True)
    matrices = [fu.ScoreMatrix(values=raw[i]) for i in range(j)]
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fu.entropy_weighted_fusion(matrices, econf, backend=kern_name)
        best = min(best, time.perf_counter() - start)
    return best


def cmd_bench(config, d_values=None, c_values=None, j_values=None, repeats=3, log=print):
    """Time entropy-weighted fusion across sizes for every backend.

    The sweep crosses row counts with class counts and classifier
    counts, reports the best of `repeats` wall-clock timings, and checks
    that time grows roughly linearly in d.
    """
    config = normalize_config(config)
    d_values = tuple(d_values) if d_values else BENCH_DEFAULT_D
    c_values = tuple(c_values) if c_values else BENCH_DEFAULT_C
    j_values = tuple(j_values) if j_values else BENCH_DEFAULT_J
    for j in j_values:
        if j < 2:
            raise InvalidConfigError("fusion needs at least 2 classifiers (J >= 2)")
    if any(d < 1 for d in d_values) or any(c < 2 for c in c_values):
        raise InvalidConfigError("bench sizes need d >= 1 and c >= 2")
    econf = entropy_config(config)
    backends = available_backends()
    lines = [
        "entropy-weighted fusion benchmark (best of "
        f"{repeats}, seconds; alpha={econf.alpha}, tau={econf.tau})",
        f"{'backend':>9}  {'d':>8}  {'c':>3}  {'J':>2}  {'seconds':>10}  {'us/row':>8}",
    ]
    results = {}
    base_c, base_j = c_values[0], j_values[0]
    for backend in backends:
        rng = np.random.default_rng(config["seed"])
        for d in d_values:
            for c in c_values:
                for j in j_values:
                    if (c, j) != (base_c, base_j) and d != d_values[0]:
                        continue  # full grid only at the smallest d
                    seconds = _bench_cell(backend, d, c, j, econf, repeats, rng)
                    results[(backend, d, c, j)] = seconds
                    lines.append(
                        f"{backend:>9}  {d:>8}  {c:>3}  {j:>2}  {seconds:>10.6f}"
                        f"  {1e6 * seconds / d:>8.3f}"
                    )
    for backend in backends:
        series = [
            (d, results[(backend, d, base_c, base_j)])
            for d in d_values
            if (backend, d, base_c, base_j) in results
        ]
        for (d0, t0), (d1, t1) in zip(series, series[1:]):
            ratio = (t1 / t0) / (d1 / d0) if t0 > 0 else float("nan")
            lines.append(
                f"scaling {backend}: d {d0} -> {d1}: time ratio/size ratio = {ratio:.2f}"
            )
    if len(backends) == 2:
        pure_total = sum(v for (b, *_), v in results.items() if b == "pure")
        comp_total = sum(v for (b, *_), v in results.items() if b == "compiled")
        if comp_total > 0:
            lines.append(
                f"speedup (pure / compiled, summed over grid): {pure_total / comp_total:.2f}x"
            )
    text = "\n".join(lines) + "\n"
    log(text)
    out = config.get("out")
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "bench.txt").write_text(text, encoding="utf-8")
        write_manifest(out_dir, "bench", config, ["bench.txt"])
    return results
