"""Pydantic request/response models for the triage service."""
from __future__ import annotations

from pydantic import BaseModel, Field

from flowtriage.flows.types import FlowRecord


class FlowIn(BaseModel):
    flow_id: str
    timestamp: str = ""
    src_ip: str = ""
    dst_ip: str = ""
    src_port: int = Field(default=0, ge=0, le=65535)
    dst_port: int = Field(default=0, ge=0, le=65535)
    protocol: str = ""
    features: dict[str, float | str | None] = Field(default_factory=dict)

    def to_record(self) -> FlowRecord:
        return FlowRecord(
            flow_id=self.flow_id,
            timestamp=self.timestamp,
            src_ip=self.src_ip,
            dst_ip=self.dst_ip,
            src_port=self.src_port,
            dst_port=self.dst_port,
            protocol=self.protocol,
            raw_features=list(self.features.items()),
        )


class PredictionOut(BaseModel):
    flow_id: str
    predicted_class: str
    confidence: float
    tier: str
    per_class_probs: list[float]


class ClassifyRequest(BaseModel):
    flows: list[FlowIn]


class ClassifyResponse(BaseModel):
    results: list[PredictionOut]


class EvidenceOut(BaseModel):
    feature: str
    value: float | str | None
    importance: float
    description: str
    security_implication: str
    rendered: str


class ExplainRequest(BaseModel):
    flow: FlowIn | None = None
    flow_id: str | None = None
    top_k: int | None = Field(default=None, ge=1, le=66)


class ExplainResponse(BaseModel):
    prediction: PredictionOut
    evidence: list[EvidenceOut]


class ScoredChunkOut(BaseModel):
    chunk_id: str
    bm25_norm: float
    sem_sim: float
    fused: float
    rerank: float | None
    text: str
    citation_label: str
    relevance_label: str


class RetrieveRequest(BaseModel):
    query: str
    k: int = Field(default=5, ge=1, le=50)


class RetrieveResponse(BaseModel):
    query: str
    expanded_query: str
    ranked: list[ScoredChunkOut]
    fallback_used: bool
    fallback_chunk_ids: list[str]


class ReportOut(BaseModel):
    mode: str
    text: str
    word_count: int
    truncated: bool
    model_id: str
    sections: dict | None
    citations: list[str]
    parse_error: str | None


class ReportRequest(BaseModel):
    flow: FlowIn | None = None
    flow_id: str | None = None
    mode: str = Field(default="rag", pattern="^(rag|vanilla|both)$")


class ReportResponse(BaseModel):
    flow_id: str
    prediction: PredictionOut
    evidence: list[EvidenceOut]
    retrieval: RetrieveResponse
    reports: dict[str, ReportOut]


class HealthResponse(BaseModel):
    status: str
    version: str
    kb_chunks: int
    models: list[str]
    dataset: str
