"""Evidence-rich prompt assembly for the report generator.

The prompt is a fixed sequence of labeled blocks: detection context, flow
metadata, anomalous indicators, retrieved knowledge, report request. In
vanilla mode the knowledge block keeps its header but carries an empty
body, so a vanilla/rag pair differs in that block alone.
"""
from __future__ import annotations

from dataclasses import dataclass

from flowtriage.attribution import EvidenceItem
from flowtriage.flows.types import ClassLabel, FlowRecord
from flowtriage.knowledge import Chunk
from flowtriage.nn.ensemble import ConfidenceTier, assign_tier

SYSTEM_INSTRUCTION = (
    "You are a senior security operations analyst. Write a structured "
    "incident response report grounded in the evidence below. Cite NIST "
    "Special Publications and MITRE ATT&CK technique identifiers "
    "explicitly wherever they apply."
)

BLOCK_DETECTION = "[DETECTION CONTEXT]"
BLOCK_METADATA = "[NETWORK FLOW METADATA]"
BLOCK_INDICATORS = "[KEY ANOMALOUS INDICATORS]"
BLOCK_KNOWLEDGE = "[RETRIEVED KNOWLEDGE CONTEXT]"
BLOCK_REQUEST = "[REPORT REQUEST]"
BLOCK_ORDER = (BLOCK_DETECTION, BLOCK_METADATA, BLOCK_INDICATORS, BLOCK_KNOWLEDGE, BLOCK_REQUEST)

_REPORT_REQUEST_BODY = (
    "Generate a structured report with sections:\n"
    "1. Rationale\n"
    "2. Key Indicators\n"
    "3. Confidence Assessment\n"
    "4. Threat Assessment\n"
    "5. Recommendations"
)


class PromptError(ValueError):
    def __init__(self, missing: list[str]):
        super().__init__(f"unresolved prompt variables: {', '.join(missing)}")
        self.missing = missing


@dataclass(frozen=True)
class DetectionContext:
    attack_class: ClassLabel
    confidence_score: float
    confidence_tier: ConfidenceTier
    dataset: str

    def __post_init__(self) -> None:
        if assign_tier(self.confidence_score) is not self.confidence_tier:
            raise ValueError(
                f"tier {self.confidence_tier} inconsistent with confidence "
                f"{self.confidence_score}"
            )


@dataclass(frozen=True)
class PromptDocument:
    system_instruction: str
    blocks: tuple[tuple[str, str], ...]
    mode: str  # "rag" or "vanilla"

    @property
    def text(self) -> str:
        parts = [f"SYSTEM:\n{self.system_instruction}", "USER:"]
        for header, body in self.blocks:
            parts.append(f"{header}\n{body}" if body else header)
        return "\n\n".join(parts) + "\n"

    def block_body(self, header: str) -> str:
        for h, body in self.blocks:
            if h == header:
                return body
        raise KeyError(header)


def render_chunk(chunk: Chunk) -> str:
    """Chunk rendering keeps the citation label visible to the generator."""
    return f"[source: {chunk.citation_label}] {chunk.text}"


def build_prompt(
    ctx: DetectionContext,
    meta: FlowRecord,
    evidence: list[EvidenceItem],
    retrieved: list[Chunk],
    mode: str = "rag",
) -> PromptDocument:
    """Assemble the full prompt. Pure: identical inputs give identical text."""
    if mode not in ("rag", "vanilla"):
        raise ValueError(f"unknown prompt mode {mode!r}")

    missing = [
        name
        for name, value in (
            ("attack_class", ctx.attack_class),
            ("confidence_score", ctx.confidence_score),
            ("dataset", ctx.dataset),
            ("flow_id", meta.flow_id),
        )
        if value is None or value == ""
    ]
    if not evidence:
        missing.append("evidence")
    if missing:
        raise PromptError(missing)
    if mode == "rag" and not retrieved:
        raise PromptError(["retrieved_chunks"])

    detection = (
        f"Attack class: {ctx.attack_class}\n"
        f"Confidence: {ctx.confidence_score:.4f} ({ctx.confidence_tier})\n"
        f"Dataset: {ctx.dataset}"
    )
    metadata = (
        f"Flow ID: {meta.flow_id}\n"
        f"Timestamp: {meta.timestamp or 'unknown'}\n"
        f"Source: {meta.src_ip}:{meta.src_port}\n"
        f"Destination: {meta.dst_ip}:{meta.dst_port}\n"
        f"Protocol: {meta.protocol}"
    )

    indicator_lines = [f"Top-{len(evidence)} features most influential in this decision:"]
    for i, item in enumerate(evidence, start=1):
        indicator_lines.append(f"Feature {i}: {item.feature_name} = {item.raw_value}")
        indicator_lines.append(f"  -> {item.rendered}")
    indicators = "\n".join(indicator_lines)

    knowledge = "" if mode == "vanilla" else "\n".join(render_chunk(c) for c in retrieved)

    return PromptDocument(
        system_instruction=SYSTEM_INSTRUCTION,
        blocks=(
            (BLOCK_DETECTION, detection),
            (BLOCK_METADATA, metadata),
            (BLOCK_INDICATORS, indicators),
            (BLOCK_KNOWLEDGE, knowledge),
            (BLOCK_REQUEST, _REPORT_REQUEST_BODY),
        ),
        mode=mode,
    )


def build_retrieval_query(
    ctx: DetectionContext,
    meta: FlowRecord,
    evidence: list[EvidenceItem],
) -> str:
    """Deterministic retrieval query from the classification outcome."""
    parts = [f"{ctx.attack_class} attack mitigation and incident response"]
    parts.extend(item.feature_name for item in evidence)
    parts.extend(item.security_implication for item in evidence)
    if meta.protocol:
        parts.append(f"protocol {meta.protocol}")
    return "; ".join(parts)
