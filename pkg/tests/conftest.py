from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import build_fixture_kb, tiny_schema  # noqa: E402


@pytest.fixture(scope="session")
def fixture_kb():
    return build_fixture_kb()


@pytest.fixture()
def schema():
    return tiny_schema()


DOC_TEXTS = {
    "dos_response.txt": (
        "# Detection\n"
        "Single source floods exhaust service resources. SYN floods show "
        "abnormal packet rates and half open connections. "
        "Watch for sustained volumetric dos traffic from one origin.\n"
        "# Containment\n"
        "Apply rate limiting at the edge. Enable SYN cookies on exposed "
        "servers. Block the offending source address. Follow NIST SP 800-61 "
        "incident handling for denial of service events per T1498 guidance. "
        "Exhaustion patterns require upstream coordination with providers. "
        "Rate limiting thresholds should reflect baseline traffic volumes. "
        "Flood indicators include uniform small packets and high syn counts."
    ),
    "ddos_response.txt": (
        "# Detection\n"
        "Distributed attacks arrive from many coordinated sources. Botnet "
        "traffic shows synchronized timing and amplification signatures. "
        "DNS and NTP reflection multiply attacker bandwidth.\n"
        "# Containment\n"
        "Engage upstream filtering and traffic scrubbing services. "
        "Distributed denial of service mitigation per T1498.001 requires "
        "provider coordination. Amplification vectors should be rate limited "
        "at resolvers. Botnet coordination patterns justify infrastructure "
        "level response rather than host level countermeasures. Follow "
        "NIST SP 800-61 escalation procedures for large scale ddos events."
    ),
    "benign_baseline.txt": (
        "# Baseline\n"
        "Normal traffic shows balanced bidirectional exchanges and human "
        "paced timing. Legitimate sessions complete standard handshake "
        "sequences. Benign flows match established baselines.\n"
        "# Monitoring\n"
        "Continue routine monitoring and baseline validation. No escalation "
        "is required for compliant traffic. Document the review and keep "
        "monitoring thresholds aligned with NIST SP 800-94 guidance for "
        "normal network behavior. Periodic baseline refreshes prevent alert "
        "fatigue from legitimate variation."
    ),
    "general_ir.txt": (
        "# Principles\n"
        "General incident response follows preparation, detection and "
        "analysis, containment, eradication, and recovery. Document every "
        "action taken during an incident. NIST SP 800-61 defines the "
        "incident handling lifecycle. Escalate when impact or scope grows. "
        "Preserve evidence and coordinate communication with stakeholders. "
        "Post incident review captures lessons learned for the playbook."
    ),
}

DOCS_MANIFEST = {
    "dos_response.txt": {
        "title": "Service flood response",
        "source_kind": "playbook",
        "citation_label": "NIST SP 800-61 Rev. 2",
    },
    "ddos_response.txt": {
        "title": "Distributed flood response",
        "source_kind": "MITRE-ATTACK",
        "citation_label": "T1498.001",
    },
    "benign_baseline.txt": {
        "title": "Baseline traffic monitoring",
        "source_kind": "NIST-SP",
        "citation_label": "NIST SP 800-94",
    },
    "general_ir.txt": {
        "title": "Incident response principles",
        "source_kind": "NIST-SP",
        "citation_label": "NIST SP 800-61",
    },
}


def build_artifacts(root: Path, n_per_class: int = 150, seed: int = 11) -> Path:
    """Produce a complete artifact set: schema, flows, models, KB, config."""
    from flowtriage.flows.encode import apply_normalizer, encode_dataset, fit_apply_normalizer
    from flowtriage.flows.loader import save_schema
    from flowtriage.flows.splits import stratified_split
    from flowtriage.flows.types import ClassLabel
    from flowtriage.knowledge import build_kb, parse_document_text, persist_kb
    from flowtriage.nn.loss import ClassWeights
    from flowtriage.nn.mlp import MLPConfig
    from flowtriage.nn.store import save_model
    from flowtriage.nn.training import TrainConfig, train_binary_classifier
    from flowtriage.synthetic import flows_to_csv, generate_flows, synthetic_schema

    root.mkdir(parents=True, exist_ok=True)
    schema = synthetic_schema()
    records = generate_flows(n_per_class, seed=seed)
    dataset = encode_dataset(records, schema)
    labels = dataset.class_labels()
    split = stratified_split(labels, seed=seed)

    train_idx = np.array(split.train)
    val_idx = np.array(split.validation)
    stats, _, _ = fit_apply_normalizer(
        dataset.X[train_idx], numeric_width=schema.numeric_width
    )
    X = apply_normalizer(dataset.X, stats)

    models_dir = root / "models"
    models_dir.mkdir(exist_ok=True)
    arch = MLPConfig(layer_widths=(32, 16), dropout=(0.1, 0.1), input_dim=schema.pad_to)
    config = TrainConfig(batch_size=128, max_epochs=25, patience=5, seed=seed)
    for label, name in (
        (ClassLabel.BENIGN, "benign"),
        (ClassLabel.DOS, "dos"),
        (ClassLabel.DDOS, "ddos"),
    ):
        y_tr = np.array([1.0 if labels[i] == label else 0.0 for i in train_idx])
        y_va = np.array([1.0 if labels[i] == label else 0.0 for i in val_idx])
        n_pos = int(y_tr.sum())
        weights = ClassWeights.from_counts(len(y_tr) - n_pos, n_pos)
        model, _ = train_binary_classifier(
            X[train_idx], y_tr, X[val_idx], y_va, arch, config, weights, target_class=label
        )
        save_model(model, models_dir / f"{name}.npz")
    (models_dir / "stats.json").write_text(json.dumps(stats.to_dict()))
    save_schema(schema, models_dir / "schema.json")
    save_schema(schema, root / "schema.json")

    docs_dir = root / "docs"
    docs_dir.mkdir(exist_ok=True)
    for name, text in DOC_TEXTS.items():
        (docs_dir / name).write_text(text, encoding="utf-8")
    (docs_dir / "docs.json").write_text(json.dumps(DOCS_MANIFEST))

    docs = [
        parse_document_text(
            DOC_TEXTS[name],
            doc_id=Path(name).stem,
            title=meta["title"],
            source_kind=meta["source_kind"],
            citation_label=meta["citation_label"],
        )
        for name, meta in DOCS_MANIFEST.items()
    ]
    kb = build_kb(docs, chunk_size=60, overlap=20)
    persist_kb(kb, root / "kb.jsonl")
    fallback_ids = [c.chunk_id for c in kb.chunks if c.doc_id == "general_ir"][:2]

    # a small sample of each class for pipeline runs
    sample = records[:4] + records[n_per_class : n_per_class + 4] + records[2 * n_per_class : 2 * n_per_class + 4]
    flows_to_csv(sample, schema, root / "flows.csv")
    flows_to_csv(records, schema, root / "flows_all.csv")

    (root / "thesaurus.json").write_text(
        json.dumps(
            {
                "dos": ["denial of service", "resource exhaustion", "flooding"],
                "ddos": ["distributed denial of service", "botnet flood", "amplification attack"],
            }
        )
    )

    config_doc = {
        "schema": "schema.json",
        "models_dir": "models",
        "kb": "kb.jsonl",
        "flows": "flows.csv",
        "thesaurus": "thesaurus.json",
        "fallback_chunk_ids": fallback_ids,
        "dataset": "synthetic-flows",
        "mode": "both",
        "seed": seed,
        "providers": {
            "embedding": {"kind": "hash", "width": 128, "seed": 5},
            "reranker": {"kind": "jaccard"},
            "generator": {"kind": "template"},
        },
    }
    (root / "config.json").write_text(json.dumps(config_doc, indent=2))
    return root


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    return build_artifacts(tmp_path_factory.mktemp("artifacts"))


@pytest.fixture(scope="session")
def runtime(artifacts):
    from flowtriage.pipeline.config import PipelineConfig
    from flowtriage.pipeline.runtime import PipelineRuntime

    return PipelineRuntime.from_config(PipelineConfig.load(artifacts / "config.json"))
