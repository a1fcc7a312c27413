"""FastAPI service wrapping the loaded pipeline runtime.

The service hosts the expensive-to-load artifacts (models, knowledge base,
indexes) once and answers classification, attribution, retrieval, and
report requests for many clients. Batch jobs (preprocessing, training,
ingestion, evaluation) stay in the CLI.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

import flowtriage
from flowtriage.flows.types import FlowRecord
from flowtriage.nn.ensemble import EnsemblePrediction
from flowtriage.pipeline.config import PipelineConfig
from flowtriage.pipeline.runtime import PipelineRuntime
from flowtriage.reporting.sections import extract_citations
from flowtriage.service.schemas import (
    ClassifyRequest,
    ClassifyResponse,
    EvidenceOut,
    ExplainRequest,
    ExplainResponse,
    FlowIn,
    HealthResponse,
    PredictionOut,
    ReportOut,
    ReportRequest,
    ReportResponse,
    RetrieveRequest,
    RetrieveResponse,
    ScoredChunkOut,
)


def create_app(runtime: PipelineRuntime | str | None = None) -> FastAPI:
    """Build the service around a runtime or a config file path."""
    if isinstance(runtime, str):
        runtime = PipelineRuntime.from_config(PipelineConfig.load(runtime))

    app = FastAPI(title="flowtriage", version=flowtriage.__version__)
    app.state.runtime = runtime

    def need_runtime() -> PipelineRuntime:
        rt = app.state.runtime
        if rt is None:
            raise HTTPException(status_code=503, detail="runtime not configured")
        return rt

    def prediction_out(flow_id: str, pred: EnsemblePrediction) -> PredictionOut:
        return PredictionOut(
            flow_id=flow_id,
            predicted_class=str(pred.label),
            confidence=pred.confidence,
            tier=str(pred.tier),
            per_class_probs=list(pred.per_class_probs),
        )

    def resolve_flow(flow: FlowIn | None, flow_id: str | None) -> FlowRecord:
        rt = need_runtime()
        if flow is not None:
            try:
                return flow.to_record()
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
        if flow_id is not None:
            try:
                return rt.lookup_flow(flow_id)
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from None
        raise HTTPException(status_code=422, detail="provide either flow or flow_id")

    def retrieval_response(result) -> RetrieveResponse:
        rt = need_runtime()
        ranked = []
        for sc in result.ranked:
            chunk = rt.kb.by_id(sc.chunk_id)
            ranked.append(
                ScoredChunkOut(
                    chunk_id=sc.chunk_id,
                    bm25_norm=sc.bm25_norm,
                    sem_sim=sc.sem_sim,
                    fused=sc.fused,
                    rerank=sc.rerank,
                    text=chunk.text,
                    citation_label=chunk.citation_label,
                    relevance_label=chunk.relevance_label,
                )
            )
        return RetrieveResponse(
            query=result.query,
            expanded_query=result.expanded_query,
            ranked=ranked,
            fallback_used=result.fallback_used,
            fallback_chunk_ids=list(result.fallback_chunk_ids),
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        rt = need_runtime()
        return HealthResponse(
            status="ok",
            version=flowtriage.__version__,
            kb_chunks=len(rt.kb),
            models=[str(label) for label in rt.models],
            dataset=rt.config.dataset_name,
        )

    @app.post("/classify", response_model=ClassifyResponse)
    def classify(request: ClassifyRequest) -> ClassifyResponse:
        rt = need_runtime()
        results = []
        for flow in request.flows:
            record = resolve_flow(flow, None)
            try:
                pred = rt.classify(record)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
            results.append(prediction_out(record.flow_id, pred))
        return ClassifyResponse(results=results)

    @app.post("/explain", response_model=ExplainResponse)
    def explain(request: ExplainRequest) -> ExplainResponse:
        rt = need_runtime()
        record = resolve_flow(request.flow, request.flow_id)
        prediction, evidence = rt.explain(record, k=request.top_k)
        return ExplainResponse(
            prediction=prediction_out(record.flow_id, prediction),
            evidence=[EvidenceOut(**item.to_dict()) for item in evidence],
        )

    @app.post("/retrieve", response_model=RetrieveResponse)
    def retrieve(request: RetrieveRequest) -> RetrieveResponse:
        rt = need_runtime()
        result = rt.retrieve(request.query, k=request.k)
        return retrieval_response(result)

    @app.post("/report", response_model=ReportResponse)
    def report(request: ReportRequest) -> ReportResponse:
        rt = need_runtime()
        record = resolve_flow(request.flow, request.flow_id)
        try:
            prediction, evidence, retrieval, reports = rt.report_flow(record, request.mode)
        except Exception as exc:
            raise HTTPException(status_code=502, detail=f"report generation failed: {exc}")
        return ReportResponse(
            flow_id=record.flow_id,
            prediction=prediction_out(record.flow_id, prediction),
            evidence=[EvidenceOut(**item.to_dict()) for item in evidence],
            retrieval=retrieval_response(retrieval),
            reports={
                m: ReportOut(
                    mode=m,
                    text=rep.generated.text,
                    word_count=rep.generated.word_count,
                    truncated=rep.generated.truncated,
                    model_id=rep.generated.model_id,
                    sections=rep.sections,
                    citations=list(extract_citations(rep.generated.text)),
                    parse_error=rep.parse_error,
                )
                for m, rep in reports.items()
            },
        )

    return app
