"""Pydantic request/response models for the dashboard API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class MetaResponse(BaseModel):
    kind: str
    feature_names: list[str]
    column_kinds: list[str]
    categories: dict[str, list[str]]  # categorical feature -> legal text values
    class_names: list[str]
    n_test_rows: int
    weights: dict[str, float]


class InstanceRequest(BaseModel):
    """Either a test-set row index or a full name->value instance
    (categorical features as text)."""

    row: int | None = None
    instance: dict[str, float | str] | None = None


class PredictResponse(BaseModel):
    proba: float
    label: int


class Contribution(BaseModel):
    name: str
    phi: float
    sign: str
    value: float | str


class ExplainResponse(BaseModel):
    base_value: float
    output_value: float
    space: str
    proba: float
    label: int
    contributions: list[Contribution]
    reasons: list[str]
    suggestions: list[str]
    narrative_source: str


class WhatIfRequest(InstanceRequest):
    edits: dict[str, float | str] = Field(default_factory=dict)


class WhatIfResponse(BaseModel):
    original_proba: float
    new_proba: float
    edits: list[list]  # [feature, old, new]
    explanation: ExplainResponse


class SummaryFeature(BaseModel):
    name: str
    shap_values: list[float]
    norm_values: list[float]
    raw_values: list[float]


class SummaryResponse(BaseModel):
    feature_order: list[str]
    features: list[SummaryFeature]


class ImportanceRequest(BaseModel):
    top_k: int | None = None


class ImportanceEntry(BaseModel):
    name: str
    mean_abs_shap: float


class ImportanceResponse(BaseModel):
    ranking: list[ImportanceEntry]


class DependenceRequest(BaseModel):
    feature: str


class DependencePoint(BaseModel):
    value: float
    shap: float


class DependenceResponse(BaseModel):
    feature: str
    points: list[DependencePoint]
