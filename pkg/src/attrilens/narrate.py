"""Prompt assembly, deterministic narrative templating, an optional
completion-service client, and what-if scenario evaluation."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .data import CategoryCodebook, DataError
from .explain import ShapExplanation
from .weighting import apply_weights_vector

log = logging.getLogger(__name__)

CLOSING_INSTRUCTION = (
    "Please write the reason of stay or leave in bullet points?. "
    "Also provide suggestions how to retain the employee in bullet points"
)


@dataclass
class PolicyRules:
    rules: list[str] = field(default_factory=list)


@dataclass
class Prompt:
    text: str


@dataclass
class Narrative:
    reasons: list[str]
    suggestions: list[str]
    source: str  # "template" | "external"


@dataclass
class CompletionEndpoint:
    """Generic text-completion HTTP endpoint; credential comes from the
    environment variable named in `credential_env`."""

    url: str
    model: str = "default"
    credential_env: str = "ATTRILENS_COMPLETION_TOKEN"
    timeout: float = 30.0


@dataclass
class WhatIfResult:
    original_proba: float
    new_proba: float
    edits: list  # (feature, old value, new value)
    new_explanation: ShapExplanation


def build_prompt(expl: ShapExplanation, rules: PolicyRules | None = None) -> Prompt:
    """Rules header, one fixed-format line per feature, closing instruction."""
    parts = []
    if rules and rules.rules:
        parts.append("Company rules:")
        parts.extend(f"- {rule}" for rule in rules.rules)
    for name, phi in zip(expl.feature_names, expl.phi):
        parts.append(f"The SHAP value for feature '{name}' is {phi:.2f}.")
    parts.append(CLOSING_INSTRUCTION)
    return Prompt("\n".join(parts))


def load_lexicon(path=None) -> dict:
    """feature<TAB>action lines mapping features to retention actions."""
    if path is None:
        text = (
            resources.files("attrilens.resources")
            .joinpath("retention_actions.tsv")
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    lexicon = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        feature, _, action = line.partition("\t")
        lexicon[feature] = action
    return lexicon


def template_narrative(
    expl: ShapExplanation, top_k: int = 5, lexicon: dict | None = None
) -> Narrative:
    """Deterministic offline narrative: top factors by |phi| with direction
    phrasing, plus per-feature retention actions from the lexicon."""
    if top_k < 1:
        raise DataError("top_k must be >= 1")
    if lexicon is None:
        lexicon = load_lexicon()
    order = sorted(
        range(len(expl.feature_names)), key=lambda j: (-abs(expl.phi[j]), j)
    )
    nonzero = [j for j in order if expl.phi[j] != 0.0][:top_k]
    if not nonzero:
        return Narrative(["No dominant factors: all feature contributions are zero."], [], "template")
    reasons = []
    suggestions = []
    for j in nonzero:
        name = expl.feature_names[j]
        phi = expl.phi[j]
        direction = "pushes toward leaving" if phi > 0 else "supports staying"
        reasons.append(f"{name} (SHAP value: {phi:.2f}) {direction}.")
        if phi > 0:
            action = lexicon.get(name, f"Review the factor {name} with the employee.")
            suggestions.append(action)
    if not suggestions:
        suggestions.append("No risk-increasing factors among the top contributors; maintain current conditions.")
    return Narrative(reasons, suggestions, "template")


def _parse_bullets(text: str) -> list[str]:
    bullets = []
    for line in text.splitlines():
        line = line.strip()
        if line.startswith(("-", "*", "•")):
            bullets.append(line.lstrip("-*• ").strip())
    return bullets


def complete(
    prompt: Prompt,
    endpoint: CompletionEndpoint | None,
    fallback_expl: ShapExplanation | None = None,
    top_k: int = 5,
) -> Narrative:
    """POST the prompt to the completion service; any failure degrades to the
    template narrative (never raises on network problems)."""

    def fallback() -> Narrative:
        if fallback_expl is not None:
            return template_narrative(fallback_expl, top_k=top_k)
        return Narrative([], [], "template")

    if endpoint is None or not endpoint.url:
        return fallback()
    import requests

    headers = {"Content-Type": "application/json"}
    token = os.environ.get(endpoint.credential_env, "")
    if token:
        headers["Authorization"] = f"Bearer {token}"
    try:
        resp = requests.post(
            endpoint.url,
            json={"model": endpoint.model, "prompt": prompt.text},
            headers=headers,
            timeout=endpoint.timeout,
        )
        if resp.status_code != 200:
            raise RuntimeError(f"status {resp.status_code}")
        body = resp.json()
        text = body.get("completion") or body.get("text") or ""
        bullets = _parse_bullets(text)
        if not bullets:
            raise RuntimeError("no bullet lines in response body")
    except Exception as exc:  # noqa: BLE001 - deliberate catch-all fallback
        log.warning("completion endpoint failed (%s); using template narrative", exc)
        return fallback()
    # first half = reasons, remainder = suggestions, unless the service
    # separates them with a blank-line paragraph break
    half = (len(bullets) + 1) // 2
    return Narrative(bullets[:half], bullets[half:], "external")


def what_if(
    model,
    x: np.ndarray,
    edits: list,
    explainer,
    feature_names=None,
    codebook: CategoryCodebook | None = None,
    weights: dict | None = None,
):
    """Re-predict and re-explain after applying feature edits.

    `x` is in raw (unweighted) feature space; pipeline feature weights are
    applied before prediction when supplied. `edits` pairs are
    (feature name, new value), categorical values given as codebook codes
    or text.
    """
    feature_names = list(feature_names or model.feature_names)
    x = np.asarray(x, dtype=np.float64)

    def model_input(vec):
        return apply_weights_vector(vec, feature_names, weights) if weights else vec

    applied = []
    edited = x.copy()
    for name, new in edits:
        if name not in feature_names:
            raise DataError(f"unknown feature {name!r}")
        j = feature_names.index(name)
        old = edited[j]
        if codebook is not None and name in codebook:
            if isinstance(new, str):
                new = codebook.encode(name, new)
            else:
                codebook.decode(name, int(round(float(new))))  # range check
                new = int(round(float(new)))
        edited[j] = float(new)
        applied.append((name, float(old), float(edited[j])))

    original_proba = float(model.predict_proba(model_input(x))[0])
    new_proba = float(model.predict_proba(model_input(edited))[0])
    new_expl = explainer(model_input(edited))
    return WhatIfResult(original_proba, new_proba, applied, new_expl)
