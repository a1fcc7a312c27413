"""Generation clients, deterministic stubs, and the audit trail."""
from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

from flowtriage.reporting.prompt import (
    BLOCK_DETECTION,
    BLOCK_INDICATORS,
    BLOCK_KNOWLEDGE,
    PromptDocument,
)


@dataclass(frozen=True)
class GenerationLimits:
    max_words: int = 700
    temperature: float = 0.0


@runtime_checkable
class GenerationClient(Protocol):
    model_id: str
    deterministic: bool

    def generate(self, prompt: str, limits: GenerationLimits) -> str: ...


class GenerationError(RuntimeError):
    def __init__(self, message: str, prompt_hash: str):
        super().__init__(f"{message} (prompt {prompt_hash[:12]})")
        self.prompt_hash = prompt_hash


@dataclass(frozen=True)
class GeneratedReport:
    text: str
    word_count: int
    truncated: bool
    prompt_hash: str
    model_id: str


def prompt_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class EchoClient:
    """Returns the prompt verbatim; the simplest deterministic stub."""

    model_id = "echo-stub"
    deterministic = True

    def generate(self, prompt: str, limits: GenerationLimits) -> str:
        return prompt


class SectionTemplateClient:
    """Deterministic stub that writes a parseable five-section report.

    Copies the evidence lines into Key Indicators and the retrieved chunk
    texts (citation labels included) into Recommendations, so rag-mode
    output inherits the knowledge base's wording while vanilla-mode output
    stays generic. Stands in for a real language model in CI.
    """

    model_id = "section-template-stub"
    deterministic = True

    def generate(self, prompt: str, limits: GenerationLimits) -> str:
        detection = _block_lines(prompt, BLOCK_DETECTION)
        indicators = _block_lines(prompt, BLOCK_INDICATORS)
        knowledge = _block_lines(prompt, BLOCK_KNOWLEDGE)

        attack_class = _field(detection, "Attack class") or "traffic"
        confidence = _field(detection, "Confidence") or "unknown"

        rationale = (
            f"The flow was classified as {attack_class} based on the anomalous "
            f"indicators listed below."
        )
        key_indicators = "\n".join(indicators[1:]) if len(indicators) > 1 else "None reported."
        confidence_assessment = (
            f"Detection confidence is {confidence}; triage urgency follows the stated tier."
        )
        if knowledge:
            threat = (
                f"Observed indicators are consistent with documented {attack_class} "
                f"behavior in the retrieved guidance."
            )
            recommendations = "\n".join(knowledge)
        else:
            threat = f"Potential {attack_class} activity; impact depends on the affected services."
            recommendations = (
                "Apply standard hardening, monitor the affected hosts, and "
                "review traffic baselines for recurrence."
            )

        return (
            f"1. Rationale\n{rationale}\n\n"
            f"2. Key Indicators\n{key_indicators}\n\n"
            f"3. Confidence Assessment\n{confidence_assessment}\n\n"
            f"4. Threat Assessment\n{threat}\n\n"
            f"5. Recommendations\n{recommendations}\n"
        )


def _block_lines(prompt: str, header: str) -> list[str]:
    lines = prompt.splitlines()
    try:
        start = lines.index(header) + 1
    except ValueError:
        return []
    body: list[str] = []
    for line in lines[start:]:
        if re.fullmatch(r"\[[A-Z ]+\]", line.strip()):
            break
        if line.strip():
            body.append(line.strip())
    return body


def _field(lines: list[str], name: str) -> str | None:
    prefix = f"{name}:"
    for line in lines:
        if line.startswith(prefix):
            return line[len(prefix) :].strip()
    return None


class HttpGenerationClient:
    """Client for a local generation service.

    Protocol: POST {"model_id", "prompt", "max_length", "temperature"};
    response {"text": ..., "word_count": ...}.
    """

    deterministic = False

    def __init__(
        self,
        endpoint: str,
        model_id: str = "local-llm",
        timeout: float = 120.0,
        retries: int = 1,
        client=None,
    ) -> None:
        import httpx

        self.endpoint = endpoint
        self.model_id = model_id
        self.timeout = timeout
        self.retries = retries
        self._client = client or httpx.Client(timeout=timeout)

    def generate(self, prompt: str, limits: GenerationLimits) -> str:
        import httpx

        payload = {
            "model_id": self.model_id,
            "prompt": prompt,
            "max_length": limits.max_words,
            "temperature": limits.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(self.endpoint, json=payload)
                response.raise_for_status()
                return str(response.json()["text"])
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(0.1 * (attempt + 1))
        raise RuntimeError(f"generation request failed after {self.retries + 1} attempts: {last_error}")


class AuditLog:
    """Serialized single-writer JSONL trail of generation calls."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()

    def record(self, flow_id: str, prompt_sha: str, model_id: str, response: str) -> None:
        entry = {
            "flow_id": flow_id,
            "prompt_sha256": prompt_sha,
            "model_id": model_id,
            "response": response,
        }
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")


def generate_report(
    prompt: PromptDocument,
    client: GenerationClient,
    limits: GenerationLimits = GenerationLimits(),
    *,
    flow_id: str = "",
    audit: AuditLog | None = None,
) -> GeneratedReport:
    """Drive the generation client and return its output verbatim.

    Output longer than the word cap is truncated and flagged. Transport or
    client failures surface as GenerationError carrying the prompt hash so
    the failing request can be traced without storing the prompt.
    """
    text = prompt.text
    sha = prompt_hash(text)
    try:
        raw = client.generate(text, limits)
    except Exception as exc:
        raise GenerationError(f"generation failed: {exc}", prompt_hash=sha) from exc

    words = raw.split()
    truncated = len(words) > limits.max_words
    if truncated:
        raw = " ".join(words[: limits.max_words])
    report = GeneratedReport(
        text=raw,
        word_count=min(len(words), limits.max_words),
        truncated=truncated,
        prompt_hash=sha,
        model_id=client.model_id,
    )
    if audit is not None:
        audit.record(flow_id, sha, client.model_id, raw)
    return report
