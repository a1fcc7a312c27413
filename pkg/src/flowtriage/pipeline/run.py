"""Batch orchestration: classify, attribute, retrieve, generate, persist.

Per-flow failures are isolated: one generation timeout marks that flow's
outcome and the batch continues. Outcome sidecars are written append-only
and deterministically (stage timings live in a separate log so two runs
with identical seeds and stubs produce byte-identical sidecars).
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from flowtriage.flows.types import FlowRecord
from flowtriage.pipeline.runtime import PipelineRuntime


@dataclass
class FlowOutcome:
    flow_id: str
    prediction: dict | None = None
    evidence: list[dict] = field(default_factory=list)
    retrieval: dict | None = None
    reports: dict = field(default_factory=dict)
    error: str | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.error is not None

    def sidecar_dict(self) -> dict:
        """Deterministic serialization; timings intentionally excluded."""
        return {
            "flow_id": self.flow_id,
            "prediction": self.prediction,
            "evidence": self.evidence,
            "retrieval": self.retrieval,
            "reports": self.reports,
            "error": self.error,
        }


def _process_flow(record: FlowRecord, runtime: PipelineRuntime, mode: str) -> FlowOutcome:
    outcome = FlowOutcome(flow_id=record.flow_id)
    started = time.perf_counter()
    try:
        prediction, evidence, retrieval, reports = runtime.report_flow(
            record, mode, timings=outcome.timings
        )
        outcome.prediction = prediction.to_dict()
        outcome.evidence = [item.to_dict() for item in evidence]
        outcome.retrieval = retrieval.to_dict()
        outcome.reports = {
            m: {
                "text": rep.generated.text,
                "word_count": rep.generated.word_count,
                "truncated": rep.generated.truncated,
                "model_id": rep.generated.model_id,
                "prompt_sha256": rep.generated.prompt_hash,
                "sections": rep.sections,
                "parse_error": rep.parse_error,
            }
            for m, rep in reports.items()
        }
    except Exception as exc:  # per-flow isolation
        outcome.error = f"{type(exc).__name__}: {exc}"
    outcome.timings["total"] = time.perf_counter() - started
    return outcome


def run_pipeline(
    flows: list[FlowRecord],
    runtime: PipelineRuntime,
    mode: str | None = None,
    outcome_sink=None,
    workers: int | None = None,
) -> list[FlowOutcome]:
    """Process a flow batch end to end, collecting one outcome per flow.

    Flows run on a bounded worker pool (classification, attribution, and
    retrieval are all safe for concurrent use of the immutable runtime);
    outcomes keep input order regardless of completion order, so parallel
    runs serialize identically. `outcome_sink` receives each finished
    outcome for incremental append-only persistence.
    """
    mode = mode or runtime.config.mode
    workers = workers or runtime.config.workers
    if workers <= 1 or len(flows) <= 1:
        outcomes = []
        for record in flows:
            outcome = _process_flow(record, runtime, mode)
            outcomes.append(outcome)
            if outcome_sink is not None:
                outcome_sink(outcome)
        return outcomes

    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(lambda r: _process_flow(r, runtime, mode), flows))
    if outcome_sink is not None:
        for outcome in outcomes:
            outcome_sink(outcome)
    return outcomes


def write_outcomes(outcomes: list[FlowOutcome], out_dir: str | Path) -> Path:
    """Persist outcomes as JSONL plus a separate timing log."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sidecar = out / "outcomes.jsonl"
    with open(sidecar, "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            fh.write(json.dumps(outcome.sidecar_dict(), sort_keys=True) + "\n")
    with open(out / "timings.jsonl", "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            fh.write(
                json.dumps({"flow_id": outcome.flow_id, **outcome.timings}, sort_keys=True) + "\n"
            )
    return sidecar
