"""End-to-end orchestration: ingest, split, condition, select, evaluate,
persist. One seed drives every stochastic stage through fixed offsets."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import models
from .data import (
    DEFAULT_DROP,
    DEFAULT_TARGET,
    CategoryCodebook,
    DataError,
    EncodedTable,
    load_csv,
    preprocess,
    train_test_split,
)
from .evaluate import (
    ModelSelectionReport,
    PipelineFlags,
    confusion,
    metrics,
    select_best,
)
from .explain import BackgroundSet
from .models import Hyperparams
from .weighting import DEFAULT_WEIGHTS, apply_feature_weights

META_FORMAT = "attrilens-bundle/1"

# sub-seed offsets; the CLI's single --seed reaches every stage through these
SEED_SPLIT = 0
SEED_BACKGROUND = 404


@dataclass
class RunConfig:
    data_path: str
    output_dir: str
    drop: tuple = DEFAULT_DROP
    target: str = DEFAULT_TARGET
    test_ratio: float = 0.2
    seed: int = 42
    k_folds: int = 9
    flags: PipelineFlags = field(default_factory=PipelineFlags)
    kinds: tuple = models.MODEL_KINDS
    background_size: int = 100
    hp: Hyperparams | None = None

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "RunConfig":
        """key=value config file; explicit flag values override file values."""
        values = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise DataError(f"{path}: line {lineno} is not key=value")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        flags = PipelineFlags()
        if str(values.get("outlier", "")).lower() in ("1", "true", "yes"):
            flags.outlier_detect = True
        method = values.get("imblearn", "")
        if method:
            flags.imblearn = True
            flags.imblearn_method = str(method)
        weights_spec = values.get("weights", "")
        if weights_spec:
            from .weighting import parse_weight_spec

            flags.weighted_feature = True
            flags.weights = (
                DEFAULT_WEIGHTS if weights_spec == "default" else parse_weight_spec(weights_spec)
            )
        if "contamination" in values:
            flags.contamination = float(values["contamination"])
        if "trees" in values:
            flags.iso_trees = int(values["trees"])
        if "subsample" in values:
            flags.iso_subsample = int(values["subsample"])
        return cls(
            data_path=values["data"],
            output_dir=values.get("out", "artifacts"),
            test_ratio=float(values.get("test_ratio", 0.2)),
            seed=int(values.get("seed", 42)),
            k_folds=int(values.get("k", 9)),
            flags=flags,
        )


@dataclass
class RunResult:
    selection: ModelSelectionReport
    per_kind_test: dict  # kind -> metrics dict
    test_table: EncodedTable
    codebook: CategoryCodebook
    background: BackgroundSet
    report: dict


def _evaluate_on_test(model, test: EncodedTable, weights: dict):
    feats = test
    if weights:
        feats = apply_feature_weights(test, weights)
    pred = model.predict(feats.features)
    scores = model.predict_proba(feats.features)
    cm = confusion(test.labels, pred)
    rep = metrics(cm, scores=scores, y_true=test.labels)
    return {
        "accuracy": rep.accuracy,
        "precision": rep.precision,
        "recall": rep.recall,
        "f1": rep.f1,
        "auc": rep.auc,
        "confusion": {"tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn},
    }


def run(config: RunConfig) -> RunResult:
    raw = load_csv(config.data_path)
    table, codebook = preprocess(raw, drop=config.drop, target=config.target)
    split = train_test_split(table, config.test_ratio, config.seed + SEED_SPLIT)

    hp_by_kind = {k: (config.hp or Hyperparams(seed=config.seed)) for k in config.kinds}
    selection = select_best(
        split.train,
        flags=config.flags,
        k=config.k_folds,
        hp_by_kind=hp_by_kind,
        seed=config.seed,
        kinds=config.kinds,
    )

    # per-kind test metrics for the Tables 1-2 style report
    from .evaluate import prepare_training_table

    processed, _, _ = prepare_training_table(split.train, config.flags, seed=config.seed)
    weights = config.flags.weights if config.flags.weighted_feature else {}
    per_kind_test = {}
    for kind in config.kinds:
        model = (
            selection.refit
            if kind == selection.best_kind
            else models.fit(kind, processed, hp_by_kind[kind])
        )
        per_kind_test[kind] = _evaluate_on_test(model, split.test, weights)

    background = BackgroundSet.sample(
        processed, config.background_size, config.seed + SEED_BACKGROUND
    )

    report = {
        "data": {
            "path": os.path.basename(config.data_path),
            "rows": raw.n_rows,
            "features": table.n_features,
            "class_counts": {"no": table.class_counts()[0], "yes": table.class_counts()[1]},
            "train_rows": split.train.n_rows,
            "test_rows": split.test.n_rows,
        },
        "config": {
            "seed": config.seed,
            "test_ratio": config.test_ratio,
            "k_folds": config.k_folds,
            "flags": {
                "outlier_detect": config.flags.outlier_detect,
                "imblearn": config.flags.imblearn,
                "imblearn_method": config.flags.imblearn_method if config.flags.imblearn else None,
                "weighted_feature": config.flags.weighted_feature,
                "weights": config.flags.weights,
            },
        },
        "cross_validation": {k: selection.per_model[k] for k in sorted(selection.per_model)},
        "best": {"kind": selection.best_kind, "cv_accuracy": selection.best_accuracy},
        "test": {k: per_kind_test[k] for k in sorted(per_kind_test)},
        "outliers_removed": len(selection.removed_outliers),
        "resample": (
            {
                "method": selection.resample_report.method,
                "synthetic": selection.resample_report.synthetic_count,
                "removed": selection.resample_report.removed_count,
                "final_counts": list(selection.resample_report.final_class_counts),
            }
            if selection.resample_report
            else None
        ),
    }
    return RunResult(selection, per_kind_test, split.test, codebook, background, report)


def format_report(report: dict) -> str:
    """Stable plain-text rendering of the run report."""
    lines = []
    d = report["data"]
    lines.append(f"data: {d['path']} rows={d['rows']} features={d['features']} "
                 f"labels yes={d['class_counts']['yes']} no={d['class_counts']['no']}")
    lines.append(f"split: train={d['train_rows']} test={d['test_rows']}")
    c = report["config"]
    f = c["flags"]
    lines.append(
        f"config: seed={c['seed']} test_ratio={c['test_ratio']} k={c['k_folds']} "
        f"outlier={f['outlier_detect']} imblearn={f['imblearn_method'] or '-'} "
        f"weights={json.dumps(f['weights'], sort_keys=True)}"
    )
    if report.get("outliers_removed"):
        lines.append(f"outliers removed: {report['outliers_removed']}")
    if report.get("resample"):
        r = report["resample"]
        lines.append(
            f"resample: {r['method']} synthetic={r['synthetic']} removed={r['removed']} "
            f"final={r['final_counts'][0]}/{r['final_counts'][1]}"
        )
    lines.append(f"best model: {report['best']['kind']} "
                 f"(cv accuracy {report['best']['cv_accuracy']:.6f})")
    lines.append("")
    for kind in sorted(report["cross_validation"]):
        cv = report["cross_validation"][kind]
        t = report["test"][kind]
        cmx = t["confusion"]
        lines.append(
            f"[{kind}]\n"
            f"  cv_accuracy={cv:.6f}\n"
            f"  test_accuracy={t['accuracy']:.6f} precision={t['precision']:.6f} "
            f"recall={t['recall']:.6f} f1={t['f1']:.6f} auc={t['auc']:.6f}\n"
            f"  confusion tp={cmx['tp']} fp={cmx['fp']} fn={cmx['fn']} tn={cmx['tn']}"
        )
    return "\n".join(lines) + "\n"


# -- artifact persistence ----------------------------------------------------

def save_bundle(result: RunResult, config: RunConfig):
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    models.save_model(result.selection.refit, os.path.join(out, "model.json"))

    meta = {
        "format": META_FORMAT,
        "target": config.target,
        "feature_names": result.test_table.feature_names,
        "column_kinds": result.test_table.column_kinds,
        "codebook": result.codebook.columns,
        "weights": config.flags.weights if config.flags.weighted_feature else {},
        "flags": result.report["config"]["flags"],
        "seed": config.seed,
        "best_kind": result.selection.best_kind,
    }
    with open(os.path.join(out, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=1)
        fh.write("\n")

    with open(os.path.join(out, "background.json"), "w", encoding="utf-8") as fh:
        json.dump({"rows": result.background.rows.tolist()}, fh)
        fh.write("\n")

    _write_table_csv(os.path.join(out, "test.csv"), result.test_table)

    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(result.report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(format_report(result.report))


def _write_table_csv(path, table: EncodedTable):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(table.feature_names + ["__label__"]) + "\n")
        for i in range(table.n_rows):
            cells = [repr(float(v)) for v in table.features[i]]
            fh.write(",".join(cells + [str(int(table.labels[i]))]) + "\n")


def _read_table_csv(path) -> EncodedTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        names = header[:-1]
        feats = []
        labels = []
        for line in fh:
            cells = line.rstrip("\n").split(",")
            feats.append([float(c) for c in cells[:-1]])
            labels.append(int(cells[-1]))
    return EncodedTable(np.array(feats), np.array(labels), names, ["numeric"] * len(names))


@dataclass
class Bundle:
    """Loaded artifact set; everything the service and subcommands need."""

    model: models.Classifier
    codebook: CategoryCodebook
    background: BackgroundSet
    test_table: EncodedTable
    weights: dict
    meta: dict

    @classmethod
    def load(cls, artifact_dir) -> "Bundle":
        def path(name):
            return os.path.join(artifact_dir, name)

        try:
            with open(path("meta.json"), encoding="utf-8") as fh:
                meta = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot load {path('meta.json')}: {exc}") from exc
        if meta.get("format") != META_FORMAT:
            raise DataError(
                f"{path('meta.json')}: unsupported bundle format {meta.get('format')!r}"
            )
        model = models.load_model(path("model.json"))
        try:
            with open(path("background.json"), encoding="utf-8") as fh:
                background = BackgroundSet(np.array(json.load(fh)["rows"]))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise DataError(f"cannot load {path('background.json')}: {exc}") from exc
        test_table = _read_table_csv(path("test.csv"))
        test_table.column_kinds = list(meta["column_kinds"])
        codebook = CategoryCodebook(columns=meta["codebook"])
        return cls(model, codebook, background, test_table, meta.get("weights", {}), meta)
