"""Batch evaluation of paired vanilla/rag reports against ground truth.

Manifest layout (JSON):

    {
      "ground_truth": {"gt-dos": "path/to/dos.txt", ...},
      "entries": [
        {"flow_id": "...", "vanilla_report": "path", "rag_report": "path",
         "ground_truth_id": "gt-dos"},
        ...
      ]
    }

Reports are raw generated text; metrics are computed over tokenized text
with the shared tokenizer. The summary reports per-metric means for both
modes plus a paired Wilcoxon two-sided p-value on the per-report scores.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from flowtriage.evalkit.embed_f1 import greedy_embedding_f1
from flowtriage.evalkit.ngram import bleu, rouge
from flowtriage.evalkit.wilcoxon import wilcoxon_signed_rank
from flowtriage.retrieval.vectors import EmbeddingProvider, HashEmbedder
from flowtriage.text import tokenize

METRIC_COLUMNS = (
    "greedy_embed_f1",
    "greedy_embed_precision",
    "greedy_embed_recall",
    "rouge1_f1",
    "rouge2_f1",
    "rougeL_f1",
    "bleu",
)


@dataclass
class PairScores:
    flow_id: str
    vanilla: dict[str, float]
    rag: dict[str, float]


@dataclass
class EvaluationRun:
    pairs: list[PairScores]
    summary: dict = field(default_factory=dict)

    def table_rows(self) -> list[list[str]]:
        header = ["flow_id", "mode", *METRIC_COLUMNS]
        rows = [header]
        for pair in self.pairs:
            for mode, scores in (("vanilla", pair.vanilla), ("rag", pair.rag)):
                rows.append(
                    [pair.flow_id, mode, *(f"{scores[c]:.6f}" for c in METRIC_COLUMNS)]
                )
        return rows

    def write_table(self, path: str | Path) -> None:
        lines = ["\t".join(row) for row in self.table_rows()]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def write_summary(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.summary, indent=2, sort_keys=True) + "\n")


def score_pair(candidate: str, reference: str, embedder: EmbeddingProvider) -> dict[str, float]:
    cand = tokenize(candidate)
    ref = tokenize(reference)
    r1, r2, rl = rouge(cand, ref)
    emb = greedy_embedding_f1(cand, ref, embedder)
    return {
        "greedy_embed_f1": emb.f1,
        "greedy_embed_precision": emb.precision,
        "greedy_embed_recall": emb.recall,
        "rouge1_f1": r1.f1,
        "rouge2_f1": r2.f1,
        "rougeL_f1": rl.f1,
        "bleu": bleu(cand, ref),
    }


def run_evaluation(
    manifest: dict | str | Path,
    embedder: EmbeddingProvider | None = None,
) -> EvaluationRun:
    if isinstance(manifest, (str, Path)):
        base = Path(manifest).parent
        manifest = json.loads(Path(manifest).read_text(encoding="utf-8"))
    else:
        base = Path(".")
    embedder = embedder or HashEmbedder(width=256, seed=7)

    ground_truth = {
        gt_id: Path(base, path).read_text(encoding="utf-8")
        for gt_id, path in manifest["ground_truth"].items()
    }

    pairs: list[PairScores] = []
    for entry in manifest["entries"]:
        reference = ground_truth[entry["ground_truth_id"]]
        vanilla_text = Path(base, entry["vanilla_report"]).read_text(encoding="utf-8")
        rag_text = Path(base, entry["rag_report"]).read_text(encoding="utf-8")
        pairs.append(
            PairScores(
                flow_id=entry["flow_id"],
                vanilla=score_pair(vanilla_text, reference, embedder),
                rag=score_pair(rag_text, reference, embedder),
            )
        )
    if not pairs:
        raise ValueError("evaluation manifest contains no entries")

    summary: dict = {"n_reports": len(pairs), "metrics": {}}
    for column in METRIC_COLUMNS:
        vanilla_scores = [p.vanilla[column] for p in pairs]
        rag_scores = [p.rag[column] for p in pairs]
        entry = {
            "vanilla_mean": sum(vanilla_scores) / len(pairs),
            "rag_mean": sum(rag_scores) / len(pairs),
        }
        entry["delta"] = entry["rag_mean"] - entry["vanilla_mean"]
        try:
            test = wilcoxon_signed_rank(list(zip(rag_scores, vanilla_scores)))
            entry["wilcoxon_p"] = test.p_value
            entry["wilcoxon_W"] = test.statistic
        except ValueError:
            entry["wilcoxon_p"] = None
        summary["metrics"][column] = entry
    return EvaluationRun(pairs=pairs, summary=summary)
