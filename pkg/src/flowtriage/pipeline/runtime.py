"""Loaded pipeline artifacts and the per-flow stage operations."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from flowtriage.attribution import EvidenceItem, evidence_for_flow
from flowtriage.flows.encode import apply_normalizer, encode_features
from flowtriage.flows.loader import load_flows, load_schema
from flowtriage.flows.types import (
    ClassLabel,
    FeatureSchema,
    FlowRecord,
    NormalizationStats,
)
from flowtriage.knowledge import KnowledgeBase, load_kb
from flowtriage.nn.ensemble import EnsemblePrediction, ensemble_predict
from flowtriage.nn.mlp import MLPModel
from flowtriage.nn.store import load_model
from flowtriage.pipeline.config import ConfigError, PipelineConfig, ProviderSpec
from flowtriage.reporting.generation import (
    AuditLog,
    EchoClient,
    GeneratedReport,
    GenerationClient,
    GenerationLimits,
    HttpGenerationClient,
    SectionTemplateClient,
    generate_report,
)
from flowtriage.reporting.prompt import (
    DetectionContext,
    build_prompt,
    build_retrieval_query,
)
from flowtriage.retrieval.expansion import ExpansionThesaurus
from flowtriage.retrieval.rerank import HttpRerankScorer, JaccardReranker, RerankScorer
from flowtriage.retrieval.search import RetrievalResult, Retriever
from flowtriage.retrieval.vectors import EmbeddingProvider, HashEmbedder, HttpEmbeddingProvider

MODEL_FILES = {
    ClassLabel.BENIGN: "benign.npz",
    ClassLabel.DOS: "dos.npz",
    ClassLabel.DDOS: "ddos.npz",
}


def make_embedding_provider(spec: ProviderSpec) -> EmbeddingProvider:
    if spec.kind == "hash":
        return HashEmbedder(
            width=int(spec.options.get("width", 256)),
            seed=int(spec.options.get("seed", 13)),
        )
    if spec.kind == "http":
        return HttpEmbeddingProvider(
            endpoint=spec.options["endpoint"],
            width=int(spec.options.get("width", 768)),
            timeout=float(spec.options.get("timeout", 10.0)),
            retries=int(spec.options.get("retries", 2)),
        )
    raise ConfigError(f"unknown embedding provider kind {spec.kind!r}")


def make_reranker(spec: ProviderSpec) -> RerankScorer:
    if spec.kind == "jaccard":
        return JaccardReranker()
    if spec.kind == "http":
        return HttpRerankScorer(
            endpoint=spec.options["endpoint"],
            timeout=float(spec.options.get("timeout", 10.0)),
            retries=int(spec.options.get("retries", 2)),
        )
    raise ConfigError(f"unknown reranker kind {spec.kind!r}")


def make_generation_client(spec: ProviderSpec) -> GenerationClient:
    if spec.kind == "echo":
        return EchoClient()
    if spec.kind == "template":
        return SectionTemplateClient()
    if spec.kind == "http":
        return HttpGenerationClient(
            endpoint=spec.options["endpoint"],
            model_id=spec.options.get("model_id", "local-llm"),
            timeout=float(spec.options.get("timeout", 120.0)),
            retries=int(spec.options.get("retries", 1)),
        )
    raise ConfigError(f"unknown generation client kind {spec.kind!r}")


@dataclass
class FlowReport:
    mode: str
    prompt_text: str
    generated: GeneratedReport
    sections: dict | None
    parse_error: str | None


class PipelineRuntime:
    """Everything loaded and wired: schema, stats, models, KB, providers."""

    def __init__(
        self,
        config: PipelineConfig,
        schema: FeatureSchema,
        stats: NormalizationStats,
        models: dict[ClassLabel, MLPModel],
        kb: KnowledgeBase,
        retriever: Retriever,
        generator: GenerationClient,
        flows: dict[str, FlowRecord] | None = None,
        audit: AuditLog | None = None,
    ) -> None:
        self.config = config
        self.schema = schema
        self.stats = stats
        self.models = models
        self.kb = kb
        self.retriever = retriever
        self.generator = generator
        self.flows = flows or {}
        self.audit = audit
        self.limits = GenerationLimits(max_words=config.max_words, temperature=config.temperature)

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "PipelineRuntime":
        config.validate_artifacts()
        schema = load_schema(config.schema_path)

        stats_path = config.stats_path or Path(config.models_dir) / "stats.json"
        if not stats_path.exists():
            raise ConfigError(f"normalization stats not found at {stats_path}")
        stats = NormalizationStats.from_dict(
            json.loads(Path(stats_path).read_text(encoding="utf-8"))
        )
        if stats.mean.shape[0] != schema.numeric_width:
            raise ConfigError(
                f"stats width {stats.mean.shape[0]} does not match schema numeric "
                f"width {schema.numeric_width}"
            )

        models: dict[ClassLabel, MLPModel] = {}
        for label, filename in MODEL_FILES.items():
            path = Path(config.models_dir) / filename
            if not path.exists():
                raise ConfigError(f"model file missing for class {label}: {path}")
            model = load_model(path)
            if model.config.input_dim != schema.pad_to:
                raise ConfigError(
                    f"model {filename} input_dim {model.config.input_dim} does not "
                    f"match schema width {schema.pad_to}"
                )
            models[label] = model

        kb = load_kb(config.kb_path)
        thesaurus = (
            ExpansionThesaurus.load(config.thesaurus_path)
            if config.thesaurus_path
            else ExpansionThesaurus.default()
        )
        retriever = Retriever.build(
            kb,
            provider=make_embedding_provider(config.embedding),
            reranker=make_reranker(config.reranker),
            thesaurus=thesaurus,
            fallback_chunk_ids=config.fallback_chunk_ids,
        )
        generator = make_generation_client(config.generator)

        flows: dict[str, FlowRecord] = {}
        if config.flows_path:
            result = load_flows(config.flows_path, schema)
            flows = {rec.flow_id: rec for rec in result.records}

        audit = None
        if config.out_dir:
            Path(config.out_dir).mkdir(parents=True, exist_ok=True)
            audit = AuditLog(Path(config.out_dir) / "generation_audit.jsonl")

        return cls(
            config=config,
            schema=schema,
            stats=stats,
            models=models,
            kb=kb,
            retriever=retriever,
            generator=generator,
            flows=flows,
            audit=audit,
        )

    # -- per-flow stages ----------------------------------------------------

    def lookup_flow(self, flow_id: str) -> FlowRecord:
        try:
            return self.flows[flow_id]
        except KeyError:
            raise KeyError(f"flow {flow_id!r} not found in configured flow source") from None

    def encode_flow(self, record: FlowRecord) -> tuple[np.ndarray, np.ndarray]:
        """Raw and normalized 66-wide vectors for one record."""
        fv = encode_features(record, self.schema, missing_fill=self.stats.mean)
        normalized = apply_normalizer(fv.values[None, :], self.stats)[0]
        return fv.values, normalized

    def classify(self, record: FlowRecord) -> EnsemblePrediction:
        _, x_norm = self.encode_flow(record)
        return ensemble_predict(x_norm, self.models)

    def explain(
        self, record: FlowRecord, k: int | None = None
    ) -> tuple[EnsemblePrediction, list[EvidenceItem]]:
        _, x_norm = self.encode_flow(record)
        prediction = ensemble_predict(x_norm, self.models)
        _, evidence = evidence_for_flow(
            self.models,
            x_norm,
            record.feature_map(),
            self.schema,
            prediction,
            k=k or self.config.top_k_features,
            feature_override=list(self.config.feature_override) or None,
        )
        return prediction, evidence

    def retrieve(self, query: str, k: int | None = None) -> RetrievalResult:
        return self.retriever.retrieve(query, k=k or self.config.retrieval_k)

    def report_flow(
        self, record: FlowRecord, mode: str, timings: dict[str, float] | None = None
    ) -> tuple[EnsemblePrediction, list[EvidenceItem], RetrievalResult, dict[str, FlowReport]]:
        """Classify, attribute, retrieve, and generate reports for one flow."""
        import time as _time

        t0 = _time.perf_counter()
        prediction, evidence = self.explain(record)
        if timings is not None:
            timings["classify_attribute"] = _time.perf_counter() - t0

        ctx = DetectionContext(
            attack_class=prediction.label,
            confidence_score=prediction.confidence,
            confidence_tier=prediction.tier,
            dataset=self.config.dataset_name,
        )
        query = build_retrieval_query(ctx, record, evidence)
        t0 = _time.perf_counter()
        retrieval = self.retrieve(query)
        if timings is not None:
            timings["retrieve"] = _time.perf_counter() - t0
        context_chunks = [self.kb.by_id(cid) for cid in retrieval.context_chunk_ids()]

        t0 = _time.perf_counter()
        modes = ("rag", "vanilla") if mode == "both" else (mode,)
        reports: dict[str, FlowReport] = {}
        for m in modes:
            prompt = build_prompt(ctx, record, evidence, context_chunks, mode=m)
            generated = generate_report(
                prompt,
                self.generator,
                self.limits,
                flow_id=record.flow_id,
                audit=self.audit,
            )
            sections = None
            parse_error = None
            try:
                from flowtriage.reporting.sections import parse_report

                sections = parse_report(generated.text).to_dict()
            except ValueError as exc:
                parse_error = str(exc)
            reports[m] = FlowReport(
                mode=m,
                prompt_text=prompt.text,
                generated=generated,
                sections=sections,
                parse_error=parse_error,
            )
        if timings is not None:
            timings["generate"] = _time.perf_counter() - t0
        return prediction, evidence, retrieval, reports
