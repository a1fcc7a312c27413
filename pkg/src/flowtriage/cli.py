"""Command-line interface.

Batch jobs (preprocess, train, classify, ingest-kb, evaluate, pipeline)
run in-process against local artifacts. The online commands (classify,
explain, retrieve, report) optionally act as thin clients of a running
service via --server. Exit codes: 0 success, 1 per-flow failures occurred,
2 configuration error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from flowtriage.flows.encode import (
    encode_dataset,
    fit_apply_normalizer,
    load_encoded,
    save_encoded,
)
from flowtriage.flows.loader import load_flows, load_schema, save_schema
from flowtriage.flows.splits import rebalance, stratified_split
from flowtriage.flows.types import BalancingPlan, ClassLabel
from flowtriage.pipeline.config import ConfigError, PipelineConfig

CLASS_CHOICES = {"benign": ClassLabel.BENIGN, "dos": ClassLabel.DOS, "ddos": ClassLabel.DDOS}
EXIT_FLOW_FAILURES = 1
EXIT_CONFIG_ERROR = 2


@click.group()
def main() -> None:
    """Flow triage: detection, attribution, grounded mitigation reports."""


def _fail_config(message: str) -> None:
    click.echo(f"configuration error: {message}", err=True)
    sys.exit(EXIT_CONFIG_ERROR)


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


# ---------------------------------------------------------------- preprocess


@main.command()
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--ratios", default="0.70,0.15,0.15", show_default=True)
@click.option("--seed", default=0, show_default=True)
def preprocess(schema_path: str, input_path: str, out_dir: str, ratios: str, seed: int) -> None:
    """Encode a flow CSV, split it stratified, and fit the normalizer."""
    try:
        schema = load_schema(schema_path)
    except (ValueError, OSError) as exc:
        _fail_config(str(exc))
    result = load_flows(input_path, schema)
    for err in result.errors:
        click.echo(f"row {err.row_number}: {err.message}", err=True)
    if not result.records:
        _fail_config("no parseable flow records in input")

    dataset = encode_dataset(result.records, schema)
    labels = dataset.class_labels()
    if any(l is None for l in labels):
        _fail_config("preprocess requires labeled flows")
    split = stratified_split(labels, tuple(float(r) for r in ratios.split(",")), seed=seed)

    train_idx = np.array(split.train)
    stats, _, _ = fit_apply_normalizer(
        dataset.X[train_idx], numeric_width=schema.numeric_width
    )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_encoded(dataset, stats, out)
    save_schema(schema, out / "schema.json")
    (out / "splits.json").write_text(
        json.dumps(
            {
                "train": list(split.train),
                "validation": list(split.validation),
                "test": list(split.test),
                "ratios": list(split.ratios),
                "seed": split.seed,
            },
            indent=2,
        )
        + "\n"
    )
    click.echo(
        f"encoded {len(dataset)} flows ({len(result.errors)} row errors) into {out}; "
        f"splits {len(split.train)}/{len(split.validation)}/{len(split.test)}"
    )


# --------------------------------------------------------------------- train


def _architecture(name: str, input_dim: int):
    from flowtriage.nn.mlp import MLPConfig, cic_architecture, unsw_architecture

    if name == "cic":
        return cic_architecture(input_dim)
    if name == "unsw":
        return unsw_architecture(input_dim)
    if isinstance(name, dict):
        return MLPConfig.from_dict(name)
    raise ConfigError(f"unknown architecture {name!r}")


@main.command()
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True))
@click.option("--class", "class_name", required=True, type=click.Choice(sorted(CLASS_CHOICES)))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default=None, type=click.Path())
def train(dataset_dir: str, class_name: str, config_path: str, out_dir: str | None) -> None:
    """Train one one-vs-rest head on a preprocessed dataset."""
    from flowtriage.flows.encode import apply_normalizer
    from flowtriage.nn.loss import ClassWeights
    from flowtriage.nn.store import save_model
    from flowtriage.nn.training import TrainConfig, train_binary_classifier

    try:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail_config(f"train config: {exc}")

    target = CLASS_CHOICES[class_name]
    dataset, stats = load_encoded(dataset_dir)
    splits = json.loads((Path(dataset_dir) / "splits.json").read_text(encoding="utf-8"))

    train_idx = list(splits["train"])
    val_idx = list(splits["validation"])
    labels = [ClassLabel(v) for v in dataset.labels]

    plan_doc = doc.get("balancing")
    if plan_doc:
        plan = BalancingPlan(
            oversample_ratio=tuple(plan_doc.get("oversample_ratio", (1, 5))),
            undersample_cap=plan_doc.get("undersample_cap"),
            seed=int(plan_doc.get("seed", 0)),
        )
        binary_view = [
            target if labels[i] == target else
            (ClassLabel.BENIGN if target != ClassLabel.BENIGN else ClassLabel.DOS)
            for i in train_idx
        ]
        train_idx = rebalance(train_idx, binary_view, plan)

    X = apply_normalizer(dataset.X, stats)
    y = np.array([1.0 if labels[i] == target else 0.0 for i in train_idx])
    y_val = np.array([1.0 if labels[i] == target else 0.0 for i in val_idx])

    weights = ClassWeights.balanced()
    if doc.get("class_weighted", True):
        n_pos = int(y.sum())
        n_neg = len(y) - n_pos
        if n_pos == 0 or n_neg == 0:
            _fail_config(f"target class {class_name} missing from the training split")
        weights = ClassWeights.from_counts(n_neg, n_pos)

    train_config = TrainConfig(
        learning_rate=float(doc.get("learning_rate", 1e-3)),
        batch_size=int(doc.get("batch_size", 512)),
        patience=int(doc.get("patience", 5)),
        max_epochs=int(doc.get("max_epochs", 100)),
        selection_metric=doc.get("selection_metric", "macro_f1"),
        seed=int(doc.get("seed", 0)),
    )
    arch = _architecture(doc.get("architecture", "cic"), input_dim=dataset.X.shape[1])

    def log_epoch(entry: dict) -> None:
        click.echo(json.dumps({"class": class_name, **entry}), err=True)

    model, history = train_binary_classifier(
        X[train_idx],
        y,
        X[val_idx],
        y_val,
        arch,
        train_config,
        weights,
        target_class=target,
        on_epoch=log_epoch,
    )

    out = Path(out_dir) if out_dir else Path(dataset_dir) / "models"
    out.mkdir(parents=True, exist_ok=True)
    save_model(model, out / f"{class_name}.npz")
    for artifact in ("stats.json", "schema.json"):
        source = Path(dataset_dir) / artifact
        if source.exists():
            (out / artifact).write_text(source.read_text(encoding="utf-8"))
    click.echo(
        f"trained {class_name} head: best epoch {history.selected_epoch} of "
        f"{history.epochs_trained}, val {train_config.selection_metric} "
        f"{max(history.val_metric):.4f} -> {out / (class_name + '.npz')}"
    )


# ------------------------------------------------------------------ classify


@main.command()
@click.option("--models", "models_dir", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--server", default=None, help="Delegate inference to a running service.")
@click.option("--schema", "schema_path", default=None, type=click.Path(exists=True))
def classify(
    models_dir: str, input_path: str, out_path: str, server: str | None, schema_path: str | None
) -> None:
    """Classify each flow in a CSV and write outcome records."""
    schema = load_schema(schema_path or Path(models_dir) / "schema.json")
    result = load_flows(input_path, schema)
    for err in result.errors:
        click.echo(f"row {err.row_number}: {err.message}", err=True)

    outcomes = []
    if server:
        import httpx

        payload = {
            "flows": [
                {
                    "flow_id": rec.flow_id,
                    "timestamp": rec.timestamp,
                    "src_ip": rec.src_ip,
                    "dst_ip": rec.dst_ip,
                    "src_port": rec.src_port,
                    "dst_port": rec.dst_port,
                    "protocol": str(rec.protocol),
                    "features": dict(rec.raw_features),
                }
                for rec in result.records
            ]
        }
        response = httpx.post(f"{server.rstrip('/')}/classify", json=payload, timeout=120)
        response.raise_for_status()
        for item in response.json()["results"]:
            outcomes.append(item)
    else:
        from flowtriage.flows.encode import apply_normalizer, encode_features
        from flowtriage.flows.types import NormalizationStats
        from flowtriage.nn.ensemble import ensemble_predict
        from flowtriage.nn.store import load_model
        from flowtriage.pipeline.runtime import MODEL_FILES

        stats = NormalizationStats.from_dict(
            json.loads((Path(models_dir) / "stats.json").read_text(encoding="utf-8"))
        )
        models = {
            label: load_model(Path(models_dir) / filename)
            for label, filename in MODEL_FILES.items()
        }
        for rec in result.records:
            fv = encode_features(rec, schema, missing_fill=stats.mean)
            x = apply_normalizer(fv.values[None, :], stats)[0]
            pred = ensemble_predict(x, models)
            outcomes.append({"flow_id": rec.flow_id, **pred.to_dict()})

    with open(out_path, "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            fh.write(json.dumps(outcome, sort_keys=True) + "\n")
    click.echo(f"classified {len(outcomes)} flows -> {out_path}")


# ------------------------------------------------------------------- explain


@main.command()
@click.option("--flow", "flow_id", required=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--server", default=None)
@click.option("--k", default=None, type=int)
def explain(flow_id: str, config_path: str | None, server: str | None, k: int | None) -> None:
    """Print the evidence items behind one flow's classification."""
    if server:
        import httpx

        response = httpx.post(
            f"{server.rstrip('/')}/explain",
            json={"flow_id": flow_id, "top_k": k},
            timeout=120,
        )
        if response.status_code == 404:
            _fail_config(f"flow {flow_id!r} not found on server")
        response.raise_for_status()
        _echo_json(response.json())
        return
    if not config_path:
        _fail_config("explain requires --config (or --server)")
    runtime = _runtime_or_fail(config_path)
    try:
        record = runtime.lookup_flow(flow_id)
    except KeyError as exc:
        _fail_config(str(exc))
    prediction, evidence = runtime.explain(record, k=k)
    _echo_json(
        {
            "flow_id": flow_id,
            "prediction": prediction.to_dict(),
            "evidence": [item.to_dict() for item in evidence],
        }
    )


# ----------------------------------------------------------------- ingest-kb


@main.command(name="ingest-kb")
@click.option("--docs", "docs_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--chunk-size", default=500, show_default=True)
@click.option("--overlap", default=200, show_default=True)
@click.option("--rules", "rules_path", default=None, type=click.Path(exists=True))
@click.option("--snap/--no-snap", default=True, show_default=True)
def ingest_kb(
    docs_dir: str, out_path: str, chunk_size: int, overlap: int,
    rules_path: str | None, snap: bool,
) -> None:
    """Chunk a directory of text documents into a knowledge base file.

    An optional docs.json in the directory maps each filename to its
    title, source kind, and citation label.
    """
    from flowtriage.knowledge import build_kb, parse_document_text, persist_kb

    docs_dir_path = Path(docs_dir)
    manifest_path = docs_dir_path / "docs.json"
    manifest = (
        json.loads(manifest_path.read_text(encoding="utf-8")) if manifest_path.exists() else {}
    )
    rules = (
        json.loads(Path(rules_path).read_text(encoding="utf-8")) if rules_path else None
    )

    docs = []
    for path in sorted(docs_dir_path.glob("*.txt")):
        meta = manifest.get(path.name, {})
        docs.append(
            parse_document_text(
                path.read_text(encoding="utf-8"),
                doc_id=meta.get("doc_id", path.stem),
                title=meta.get("title", path.stem),
                source_kind=meta.get("source_kind", "playbook"),
                citation_label=meta.get("citation_label", path.stem),
            )
        )
    if not docs:
        _fail_config(f"no .txt documents found in {docs_dir}")

    try:
        kb = build_kb(docs, chunk_size, overlap, snap_sentences=snap, relevance_rules=rules)
    except ValueError as exc:
        _fail_config(str(exc))
    persist_kb(kb, out_path)
    click.echo(
        f"ingested {len(docs)} documents into {len(kb)} chunks "
        f"(avg {kb.corpus_stats.avg_chunk_tokens:.1f} tokens) -> {out_path}"
    )


# ------------------------------------------------------------------ retrieve


@main.command()
@click.option("--kb", "kb_path", default=None, type=click.Path(exists=True))
@click.option("--query", required=True)
@click.option("--k", default=5, show_default=True)
@click.option("--server", default=None)
@click.option("--thesaurus", "thesaurus_path", default=None, type=click.Path(exists=True))
@click.option("--embedder-width", default=256, show_default=True)
@click.option("--embedder-seed", default=13, show_default=True)
def retrieve(
    kb_path: str | None, query: str, k: int, server: str | None,
    thesaurus_path: str | None, embedder_width: int, embedder_seed: int,
) -> None:
    """Run one hybrid retrieval query against a knowledge base."""
    if server:
        import httpx

        response = httpx.post(
            f"{server.rstrip('/')}/retrieve", json={"query": query, "k": k}, timeout=120
        )
        response.raise_for_status()
        _echo_json(response.json())
        return
    if not kb_path:
        _fail_config("retrieve requires --kb (or --server)")

    from flowtriage.knowledge import load_kb
    from flowtriage.retrieval.expansion import ExpansionThesaurus
    from flowtriage.retrieval.rerank import JaccardReranker
    from flowtriage.retrieval.search import Retriever
    from flowtriage.retrieval.vectors import HashEmbedder

    kb = load_kb(kb_path)
    thesaurus = (
        ExpansionThesaurus.load(thesaurus_path)
        if thesaurus_path
        else ExpansionThesaurus.default()
    )
    retriever = Retriever.build(
        kb,
        provider=HashEmbedder(width=embedder_width, seed=embedder_seed),
        reranker=JaccardReranker(),
        thesaurus=thesaurus,
    )
    result = retriever.retrieve(query, k=k)
    payload = result.to_dict()
    for entry in payload["ranked"]:
        entry["text"] = kb.by_id(entry["chunk_id"]).text
        entry["citation_label"] = kb.by_id(entry["chunk_id"]).citation_label
    _echo_json(payload)


# -------------------------------------------------------------------- report


@main.command()
@click.option("--flow", "flow_id", required=True)
@click.option("--mode", default="rag", type=click.Choice(["rag", "vanilla", "both"]))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--server", default=None)
@click.option("--out", "out_dir", default=None, type=click.Path())
def report(
    flow_id: str, mode: str, config_path: str | None, server: str | None, out_dir: str | None
) -> None:
    """Generate the mitigation report(s) for one flow."""
    if server:
        import httpx

        response = httpx.post(
            f"{server.rstrip('/')}/report", json={"flow_id": flow_id, "mode": mode}, timeout=300
        )
        if response.status_code == 404:
            _fail_config(f"flow {flow_id!r} not found on server")
        response.raise_for_status()
        payload = response.json()
    else:
        if not config_path:
            _fail_config("report requires --config (or --server)")
        runtime = _runtime_or_fail(config_path)
        try:
            record = runtime.lookup_flow(flow_id)
        except KeyError as exc:
            _fail_config(str(exc))
        prediction, evidence, retrieval, reports = runtime.report_flow(record, mode)
        payload = {
            "flow_id": flow_id,
            "prediction": prediction.to_dict(),
            "evidence": [item.to_dict() for item in evidence],
            "retrieval": retrieval.to_dict(),
            "reports": {
                m: {
                    "text": rep.generated.text,
                    "word_count": rep.generated.word_count,
                    "truncated": rep.generated.truncated,
                    "sections": rep.sections,
                    "parse_error": rep.parse_error,
                }
                for m, rep in reports.items()
            },
        }
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for m, rep in payload["reports"].items():
            (out / f"{flow_id}.{m}.txt").write_text(rep["text"], encoding="utf-8")
        (out / f"{flow_id}.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
        click.echo(f"wrote report artifacts for {flow_id} to {out}")
    else:
        _echo_json(payload)


# ------------------------------------------------------------------ evaluate


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def evaluate(manifest_path: str, out_path: str) -> None:
    """Score vanilla/rag report pairs against ground truth documents."""
    from flowtriage.evalkit.manifest import run_evaluation

    try:
        run = run_evaluation(manifest_path)
    except (KeyError, ValueError, OSError) as exc:
        _fail_config(f"evaluation manifest: {exc}")
    run.write_table(out_path)
    summary_path = Path(out_path).with_suffix(".summary.json")
    run.write_summary(summary_path)
    _echo_json(run.summary)
    click.echo(f"wrote {out_path} and {summary_path}", err=True)


# ------------------------------------------------------------------ pipeline


@main.command(name="pipeline")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", default=None, type=click.Path())
@click.option("--mode", default=None, type=click.Choice(["rag", "vanilla", "both"]))
def pipeline_cmd(config_path: str, out_dir: str | None, mode: str | None) -> None:
    """Run the full batch pipeline over the configured flow source."""
    from flowtriage.pipeline.run import run_pipeline, write_outcomes

    runtime = _runtime_or_fail(config_path)
    if not runtime.flows:
        _fail_config("pipeline requires a configured flows path with parseable records")

    flows = list(runtime.flows.values())
    outcomes = run_pipeline(flows, runtime, mode=mode)
    destination = Path(out_dir) if out_dir else (runtime.config.out_dir or Path("outcomes"))
    sidecar = write_outcomes(outcomes, destination)

    failures = sum(1 for o in outcomes if o.failed)
    click.echo(f"processed {len(outcomes)} flows, {failures} failures -> {sidecar}")
    if failures:
        sys.exit(EXIT_FLOW_FAILURES)


# --------------------------------------------------------------------- serve


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(config_path: str, host: str, port: int) -> None:
    """Launch the triage service over a pipeline configuration."""
    import uvicorn

    from flowtriage.service.app import create_app

    runtime = _runtime_or_fail(config_path)
    uvicorn.run(create_app(runtime), host=host, port=port)


def _runtime_or_fail(config_path: str):
    from flowtriage.pipeline.runtime import PipelineRuntime

    try:
        config = PipelineConfig.load(config_path)
        return PipelineRuntime.from_config(config)
    except ConfigError as exc:
        _fail_config(str(exc))


if __name__ == "__main__":
    main()
