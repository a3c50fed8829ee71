"""Command-line entry point: train/select, evaluate, explain, what-if,
plot-data export, dataset synthesis, and the dashboard service."""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import models
from .data import DataError, encode_instance
from .evaluate import PipelineFlags, confusion, metrics
from .explain import ExplainError, force_data, make_explainer
from .models import ModelError
from .narrate import (
    CompletionEndpoint,
    PolicyRules,
    build_prompt,
    complete,
    template_narrative,
    what_if,
)
from .pipeline import Bundle, RunConfig, format_report, run, save_bundle
from .weighting import DEFAULT_WEIGHTS, apply_feature_weights, parse_weight_spec


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Explainable attrition-prediction pipeline."""


@main.command("run")
@click.option("--data", "data_path", type=click.Path(), help="input CSV path")
@click.option("--out", "output_dir", default="artifacts", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key=value config file; explicit flags override it")
@click.option("--seed", type=int, default=None)
@click.option("--test-ratio", type=float, default=None)
@click.option("--k", "k_folds", type=int, default=None, help="cross-validation folds")
@click.option("--outlier", is_flag=True, default=False, help="isolation-forest outlier removal")
@click.option("--contamination", type=float, default=None)
@click.option("--trees", type=int, default=None, help="isolation forest trees")
@click.option("--subsample", type=int, default=None, help="isolation forest subsample")
@click.option("--imblearn", "imblearn_method", default=None,
              type=click.Choice(["smote", "adasyn", "smote_tomek"]))
@click.option("--weights", "weights_spec", default=None,
              help='"default" or name=value[,name=value...]')
@click.option("--models", "model_subset", default=None,
              help="comma-separated subset of model kinds")
def run_cmd(data_path, output_dir, config_path, seed, test_ratio, k_folds,
            outlier, contamination, trees, subsample, imblearn_method,
            weights_spec, model_subset):
    """Execute the full pipeline and persist every artifact."""
    try:
        overrides = {
            "data": data_path,
            "out": output_dir,
            "seed": seed,
            "test_ratio": test_ratio,
            "k": k_folds,
            "outlier": "true" if outlier else None,
            "contamination": contamination,
            "trees": trees,
            "subsample": subsample,
            "imblearn": imblearn_method,
            "weights": weights_spec,
        }
        if config_path:
            config = RunConfig.from_file(config_path, overrides)
        else:
            if not data_path:
                raise DataError("--data is required (or provide --config)")
            flags = PipelineFlags()
            if outlier:
                flags.outlier_detect = True
            if contamination is not None:
                flags.contamination = contamination
            if trees is not None:
                flags.iso_trees = trees
            if subsample is not None:
                flags.iso_subsample = subsample
            if imblearn_method:
                flags.imblearn = True
                flags.imblearn_method = imblearn_method
            if weights_spec:
                flags.weighted_feature = True
                flags.weights = (
                    DEFAULT_WEIGHTS if weights_spec == "default"
                    else parse_weight_spec(weights_spec)
                )
            config = RunConfig(
                data_path=data_path,
                output_dir=output_dir,
                seed=seed if seed is not None else 42,
                test_ratio=test_ratio if test_ratio is not None else 0.2,
                k_folds=k_folds if k_folds is not None else 9,
                flags=flags,
            )
        if model_subset:
            kinds = tuple(k.strip() for k in model_subset.split(","))
            unknown = [k for k in kinds if k not in models.MODEL_KINDS]
            if unknown:
                raise DataError(f"unknown model kinds: {unknown}")
            config.kinds = kinds
        result = run(config)
        save_bundle(result, config)
        click.echo(format_report(result.report), nl=False)
    except (DataError, ModelError, ExplainError, OSError) as exc:
        _fail(str(exc))


@main.command("evaluate")
@click.option("--artifacts", "artifact_dir", default="artifacts", show_default=True)
def evaluate_cmd(artifact_dir):
    """Recompute the winner's test metrics from saved artifacts and check
    them against the persisted report."""
    try:
        bundle = Bundle.load(artifact_dir)
        test = bundle.test_table
        feats = (
            apply_feature_weights(test, bundle.weights) if bundle.weights else test
        )
        pred = bundle.model.predict(feats.features)
        scores = bundle.model.predict_proba(feats.features)
        cm = confusion(test.labels, pred)
        rep = metrics(cm, scores=scores, y_true=test.labels)
        block = {
            "accuracy": rep.accuracy,
            "precision": rep.precision,
            "recall": rep.recall,
            "f1": rep.f1,
            "auc": rep.auc,
            "confusion": {"tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn},
        }
        click.echo(f"[{bundle.meta['best_kind']}]")
        click.echo(json.dumps(block, sort_keys=True, indent=1))
        report_path = os.path.join(artifact_dir, "report.json")
        with open(report_path, encoding="utf-8") as fh:
            saved = json.load(fh)["test"][bundle.meta["best_kind"]]
        if saved != block:
            _fail("recomputed metrics disagree with report.json")
        click.echo("consistent with report.json")
    except (DataError, ModelError, OSError, json.JSONDecodeError, KeyError) as exc:
        _fail(str(exc))


def _load_instance_arg(bundle, row, instance_path):
    if (row is None) == (instance_path is None):
        raise DataError("provide exactly one of --row or --instance")
    if row is not None:
        if not 0 <= row < bundle.test_table.n_rows:
            raise DataError(f"row {row} out of range 0..{bundle.test_table.n_rows - 1}")
        return bundle.test_table.features[row].copy()
    with open(instance_path, encoding="utf-8") as fh:
        values = json.load(fh)
    return encode_instance(values, bundle.test_table.feature_names, bundle.codebook)


def _model_input(bundle, x):
    from .weighting import apply_weights_vector

    if bundle.weights:
        return apply_weights_vector(x, bundle.test_table.feature_names, bundle.weights)
    return x


@main.command("explain")
@click.option("--artifacts", "artifact_dir", default="artifacts", show_default=True)
@click.option("--row", type=int, default=None, help="test-set row index")
@click.option("--instance", "instance_path", type=click.Path(exists=True), default=None,
              help="JSON file of name->value (categoricals as text)")
@click.option("--top-k", type=int, default=5, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="also write force-plot data records here")
@click.option("--completion-url", default=None, help="optional completion endpoint")
@click.option("--completion-model", default="default")
def explain_cmd(artifact_dir, row, instance_path, top_k, out_path,
                completion_url, completion_model):
    """Explain one prediction: force-plot data plus a narrative."""
    try:
        bundle = Bundle.load(artifact_dir)
        x = _model_input(bundle, _load_instance_arg(bundle, row, instance_path))
        explainer = make_explainer(bundle.model, bundle.background,
                                   seed=bundle.meta.get("seed", 0))
        expl = explainer(x)
        proba = float(bundle.model.predict_proba(x)[0])
        fp = force_data(expl)
        click.echo(f"proba={proba:.6f} label={int(proba >= 0.5)} "
                   f"base={fp.base_value:.6f} output={fp.output_value:.6f} "
                   f"space={expl.space}")
        for name, phi, sign in fp.contributions[:top_k]:
            click.echo(f"  {sign} {name}: {phi:+.4f}")
        if completion_url:
            prompt = build_prompt(expl, PolicyRules())
            narrative = complete(
                prompt,
                CompletionEndpoint(url=completion_url, model=completion_model),
                fallback_expl=expl, top_k=top_k,
            )
        else:
            narrative = template_narrative(expl, top_k=top_k)
        click.echo(f"narrative ({narrative.source}):")
        for r in narrative.reasons:
            click.echo(f"  - {r}")
        for s in narrative.suggestions:
            click.echo(f"  * {s}")
        if out_path:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write("# force-plot data: name phi sign\n")
                fh.write(f"# base={fp.base_value!r} output={fp.output_value!r}\n")
                for name, phi, sign in fp.contributions:
                    fh.write(f"{name}\t{phi!r}\t{sign}\n")
    except (DataError, ModelError, ExplainError, OSError, json.JSONDecodeError) as exc:
        _fail(str(exc))


@main.command("whatif")
@click.option("--artifacts", "artifact_dir", default="artifacts", show_default=True)
@click.option("--row", type=int, default=None)
@click.option("--instance", "instance_path", type=click.Path(exists=True), default=None)
@click.option("--set", "edits", multiple=True, help="name=value edit (repeatable)")
def whatif_cmd(artifact_dir, row, instance_path, edits):
    """Re-predict after feature edits; reports before/after probabilities."""
    try:
        bundle = Bundle.load(artifact_dir)
        x = _load_instance_arg(bundle, row, instance_path)
        parsed = []
        for spec in edits:
            if "=" not in spec:
                raise DataError(f"bad edit {spec!r}; expected name=value")
            name, _, value = spec.partition("=")
            try:
                parsed.append((name, float(value)))
            except ValueError:
                parsed.append((name, value))
        explainer = make_explainer(bundle.model, bundle.background,
                                   seed=bundle.meta.get("seed", 0))
        result = what_if(
            bundle.model, x, parsed, explainer,
            feature_names=bundle.test_table.feature_names,
            codebook=bundle.codebook, weights=bundle.weights,
        )
        click.echo(f"original_proba={result.original_proba:.6f}")
        click.echo(f"new_proba={result.new_proba:.6f}")
        for name, old, new in result.edits:
            click.echo(f"  {name}: {old} -> {new}")
    except (DataError, ModelError, ExplainError, OSError, json.JSONDecodeError) as exc:
        _fail(str(exc))


@main.command("export-plots")
@click.option("--artifacts", "artifact_dir", default="artifacts", show_default=True)
@click.option("--out", "out_dir", default=None, help="defaults to <artifacts>/plots")
@click.option("--dependence", "dependence_features", default=None,
              help="comma-separated features; defaults to the top 3 by importance")
def export_plots_cmd(artifact_dir, out_dir, dependence_features):
    """Write summary, importance, dependence, and ROC plot-data files."""
    try:
        from .evaluate import roc_curve
        from .explain import mean_abs_importance, summary_data

        bundle = Bundle.load(artifact_dir)
        out_dir = out_dir or os.path.join(artifact_dir, "plots")
        os.makedirs(out_dir, exist_ok=True)
        test = bundle.test_table
        pop = apply_feature_weights(test, bundle.weights) if bundle.weights else test

        summary = summary_data(bundle.model, pop, bundle.background)
        with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
            fh.write("# summary-plot data: feature shap norm_value raw_value\n")
            for name in summary.feature_order:
                for s, nv, rv in zip(summary.shap_values[name],
                                     summary.norm_values[name],
                                     summary.raw_values[name]):
                    fh.write(f"{name}\t{s!r}\t{nv!r}\t{rv!r}\n")

        ranking = mean_abs_importance(bundle.model, pop, bundle.background)
        with open(os.path.join(out_dir, "importance.txt"), "w", encoding="utf-8") as fh:
            fh.write("# importance: rank feature mean_abs_shap\n")
            for rank, (name, value) in enumerate(ranking, 1):
                fh.write(f"{rank}\t{name}\t{value!r}\n")

        if dependence_features:
            targets = [f.strip() for f in dependence_features.split(",")]
        else:
            targets = [name for name, _ in ranking[:3]]
        idx = {n: j for j, n in enumerate(pop.feature_names)}
        for feature in targets:
            if feature not in idx:
                raise DataError(f"unknown feature {feature!r}")
            j = idx[feature]
            path = os.path.join(out_dir, f"dependence_{feature}.txt")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("# dependence-plot data: value shap\n")
                for i in range(pop.n_rows):
                    fh.write(f"{pop.features[i, j]!r}\t{summary.shap_values[feature][i]!r}\n")

        scores = bundle.model.predict_proba(pop.features)
        points = roc_curve(test.labels, scores)
        with open(os.path.join(out_dir, "roc.txt"), "w", encoding="utf-8") as fh:
            fh.write("# roc: fpr tpr\n")
            for fpr, tpr in points:
                fh.write(f"{fpr!r}\t{tpr!r}\n")
        click.echo(f"plot data written to {out_dir}")
    except (DataError, ModelError, ExplainError, OSError) as exc:
        _fail(str(exc))


@main.command("serve")
@click.option("--artifacts", "artifact_dir", default="artifacts", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_cmd(artifact_dir, host, port):
    """Start the dashboard API over a saved artifact bundle."""
    try:
        bundle = Bundle.load(artifact_dir)
    except (DataError, ModelError) as exc:
        _fail(str(exc))
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(bundle), host=host, port=port, log_level="info")


@main.command("generate-data")
@click.argument("path", type=click.Path())
@click.option("--seed", type=int, default=20240717, show_default=True)
def generate_data_cmd(path, seed):
    """Write the bundled synthetic IBM-schema attrition CSV."""
    from .synth import write_csv

    write_csv(path, seed=seed)
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
