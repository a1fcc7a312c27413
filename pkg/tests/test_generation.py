import json

import pytest

from flowtriage.attribution import interpret_features
from flowtriage.flows.types import ClassLabel, FlowRecord
from flowtriage.nn.ensemble import assign_tier
from flowtriage.reporting.generation import (
    AuditLog,
    EchoClient,
    GenerationError,
    GenerationLimits,
    SectionTemplateClient,
    generate_report,
)
from flowtriage.reporting.prompt import DetectionContext, build_prompt
from flowtriage.reporting.sections import parse_report

from test_prompt import make_chunks, make_ctx, make_evidence, make_meta  # noqa: F401


@pytest.fixture()
def prompt(schema):
    return build_prompt(make_ctx(), make_meta(), make_evidence(schema), make_chunks(), "rag")


def test_echo_stub_returns_prompt_verbatim(prompt):
    report = generate_report(prompt, EchoClient())
    assert report.text == prompt.text
    assert not report.truncated
    assert report.model_id == "echo-stub"


def test_template_stub_produces_parseable_report(prompt):
    report = generate_report(prompt, SectionTemplateClient())
    sections = parse_report(report.text)
    assert "DoS" in sections.rationale
    assert "Feature 1" in sections.key_indicators
    # retrieved chunk text and citation labels are copied into recommendations
    assert "[source: NIST SP 800-61]" in sections.recommendations
    assert "NIST SP 800-61" in sections.citations


def test_template_stub_vanilla_mode_generic_recommendations(schema):
    vanilla_prompt = build_prompt(
        make_ctx(), make_meta(), make_evidence(schema), make_chunks(), "vanilla"
    )
    report = generate_report(vanilla_prompt, SectionTemplateClient())
    sections = parse_report(report.text)
    assert "[source:" not in sections.recommendations
    assert sections.citations == ()


def test_unreachable_client_surfaces_error_with_prompt_hash(prompt):
    class Failing:
        model_id = "down"
        deterministic = True

        def generate(self, prompt, limits):
            raise ConnectionError("service unavailable")

    with pytest.raises(GenerationError) as err:
        generate_report(prompt, Failing())
    assert len(err.value.prompt_hash) == 64


def test_overlength_output_truncated_with_flag(prompt):
    class Chatty:
        model_id = "chatty"
        deterministic = True

        def generate(self, prompt, limits):
            return "word " * 900

    report = generate_report(prompt, Chatty(), GenerationLimits(max_words=100))
    assert report.truncated
    assert report.word_count == 100
    assert len(report.text.split()) == 100


def test_audit_log_records_call(tmp_path, prompt):
    audit = AuditLog(tmp_path / "audit.jsonl")
    generate_report(prompt, EchoClient(), flow_id="flow-9", audit=audit)
    generate_report(prompt, EchoClient(), flow_id="flow-10", audit=audit)
    lines = (tmp_path / "audit.jsonl").read_text().splitlines()
    assert len(lines) == 2
    entry = json.loads(lines[0])
    assert entry["flow_id"] == "flow-9"
    assert entry["model_id"] == "echo-stub"
    assert len(entry["prompt_sha256"]) == 64
    assert entry["response"] == prompt.text


def test_template_stub_is_deterministic(prompt):
    client = SectionTemplateClient()
    a = generate_report(prompt, client)
    b = generate_report(prompt, client)
    assert a.text == b.text
