"""Dashboard backend: seven read-only JSON endpoints over immutable state.

Every payload value is reproducible by direct library calls on the same
artifacts; the service adds nothing but encoding and transport.
"""

from __future__ import annotations

import logging

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from ..data import DataError, encode_instance
from ..explain import ExplainError, force_data, make_explainer
from ..models import ModelError
from ..narrate import template_narrative, what_if
from ..pipeline import Bundle
from ..weighting import apply_weights_vector
from .schemas import (
    Contribution,
    DependenceRequest,
    DependenceResponse,
    DependencePoint,
    ExplainResponse,
    ImportanceEntry,
    ImportanceRequest,
    ImportanceResponse,
    InstanceRequest,
    MetaResponse,
    PredictResponse,
    SummaryFeature,
    SummaryResponse,
    WhatIfRequest,
    WhatIfResponse,
)

log = logging.getLogger("attrilens.service")

MAX_BODY_BYTES = 1 << 20


def create_app(bundle: Bundle) -> FastAPI:
    app = FastAPI(title="attrilens dashboard API")
    model = bundle.model
    codebook = bundle.codebook
    test = bundle.test_table
    weights = bundle.weights
    explain_fn = make_explainer(model, bundle.background, seed=bundle.meta.get("seed", 0))

    # summary/importance/dependence share the per-population explanations;
    # computed lazily once, then served from the cache (state is immutable)
    from ..explain import summary_data, mean_abs_importance

    test_model_space = test
    if weights:
        from ..weighting import apply_feature_weights

        test_model_space = apply_feature_weights(test, weights)
    _cache = {}

    def population_summary():
        if "summary" not in _cache:
            _cache["summary"] = summary_data(model, test_model_space, bundle.background)
        return _cache["summary"]

    def population_importance():
        if "importance" not in _cache:
            _cache["importance"] = mean_abs_importance(
                model, test_model_space, bundle.background
            )
        return _cache["importance"]

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > MAX_BODY_BYTES:
            return JSONResponse({"detail": "request body too large"}, status_code=413)
        return await call_next(request)

    def resolve_instance(req: InstanceRequest) -> np.ndarray:
        """Raw (unweighted) encoded feature vector from row index or body."""
        if req.row is not None:
            if not 0 <= req.row < test.n_rows:
                raise HTTPException(422, detail=f"row {req.row} out of range 0..{test.n_rows - 1}")
            return test.features[req.row].copy()
        if req.instance is None:
            raise HTTPException(422, detail="provide either 'row' or 'instance'")
        try:
            return encode_instance(req.instance, test.feature_names, codebook)
        except DataError as exc:
            raise HTTPException(422, detail=str(exc)) from exc

    def model_input(x: np.ndarray) -> np.ndarray:
        return apply_weights_vector(x, test.feature_names, weights) if weights else x

    def explain_payload(x_model, proba) -> ExplainResponse:
        expl = explain_fn(x_model)
        fp = force_data(expl)
        narrative = template_narrative(expl)
        by_name = dict(zip(expl.feature_names, expl.feature_values))
        contributions = []
        for name, phi, sign in fp.contributions:
            value = by_name[name]
            if name in codebook:
                value = codebook.decode(name, int(round(float(value))))
            else:
                value = float(value)
            contributions.append(Contribution(name=name, phi=phi, sign=sign, value=value))
        return ExplainResponse(
            base_value=fp.base_value,
            output_value=fp.output_value,
            space=expl.space,
            proba=proba,
            label=int(proba >= 0.5),
            contributions=contributions,
            reasons=narrative.reasons,
            suggestions=narrative.suggestions,
            narrative_source=narrative.source,
        )

    @app.get("/api/meta", response_model=MetaResponse)
    def meta():
        return MetaResponse(
            kind=model.kind,
            feature_names=test.feature_names,
            column_kinds=test.column_kinds,
            categories={k: list(v) for k, v in codebook.columns.items()},
            class_names=["No", "Yes"],
            n_test_rows=test.n_rows,
            weights=weights,
        )

    @app.post("/api/predict", response_model=PredictResponse)
    def predict(req: InstanceRequest):
        x = model_input(resolve_instance(req))
        proba = float(model.predict_proba(x)[0])
        return PredictResponse(proba=proba, label=int(proba >= 0.5))

    @app.post("/api/explain", response_model=ExplainResponse)
    def explain(req: InstanceRequest):
        x = model_input(resolve_instance(req))
        proba = float(model.predict_proba(x)[0])
        try:
            return explain_payload(x, proba)
        except (ExplainError, ModelError) as exc:
            raise HTTPException(422, detail=str(exc)) from exc

    @app.post("/api/whatif", response_model=WhatIfResponse)
    def whatif(req: WhatIfRequest):
        x = resolve_instance(req)
        try:
            result = what_if(
                model,
                x,
                list(req.edits.items()),
                explain_fn,
                feature_names=test.feature_names,
                codebook=codebook,
                weights=weights,
            )
        except (DataError, ExplainError, ModelError) as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        expl_payload = explain_payload(model_input_edited(result), result.new_proba)
        return WhatIfResponse(
            original_proba=result.original_proba,
            new_proba=result.new_proba,
            edits=[[n, o, v] for n, o, v in result.edits],
            explanation=expl_payload,
        )

    def model_input_edited(result):
        return np.asarray(result.new_explanation.feature_values, dtype=np.float64)

    @app.post("/api/summary", response_model=SummaryResponse)
    def summary():
        s = population_summary()
        return SummaryResponse(
            feature_order=s.feature_order,
            features=[
                SummaryFeature(
                    name=name,
                    shap_values=s.shap_values[name],
                    norm_values=s.norm_values[name],
                    raw_values=s.raw_values[name],
                )
                for name in s.feature_order
            ],
        )

    @app.post("/api/importance", response_model=ImportanceResponse)
    def importance(req: ImportanceRequest):
        ranking = population_importance()
        top_k = len(ranking) if req.top_k is None else req.top_k
        if not 1 <= top_k <= len(ranking):
            raise HTTPException(422, detail=f"top_k must be in 1..{len(ranking)}")
        return ImportanceResponse(
            ranking=[
                ImportanceEntry(name=n, mean_abs_shap=v) for n, v in ranking[:top_k]
            ]
        )

    @app.post("/api/dependence", response_model=DependenceResponse)
    def dependence(req: DependenceRequest):
        if req.feature not in test.feature_names:
            raise HTTPException(422, detail=f"unknown feature {req.feature!r}")
        s = population_summary()
        j = test.feature_names.index(req.feature)
        points = zip(
            [float(v) for v in test_model_space.features[:, j]],
            s.shap_values[req.feature],
        )
        return DependenceResponse(
            feature=req.feature,
            points=[DependencePoint(value=v, shap=s_) for v, s_ in points],
        )

    return app
