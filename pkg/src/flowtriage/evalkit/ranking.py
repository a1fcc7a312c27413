"""Ranked-retrieval quality: precision@k, recall@k, MRR, success rate."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RetrievalJudgment:
    """One query's relevant chunk ids and the ranked ids a system returned."""

    relevant: frozenset[str]
    returned: tuple[str, ...]


@dataclass(frozen=True)
class RankingMetrics:
    precision_at_k: float
    recall_at_k: float
    mrr: float
    success_rate: float
    k: int

    def to_dict(self) -> dict:
        return {
            f"precision@{self.k}": self.precision_at_k,
            f"recall@{self.k}": self.recall_at_k,
            "mrr": self.mrr,
            "success_rate": self.success_rate,
        }


def retrieval_metrics(judgments: list[RetrievalJudgment], k: int = 5) -> RankingMetrics:
    """Average P@k, R@k, reciprocal rank, and success over all queries.

    A query with no relevant result in the top-k contributes 0 to MRR and
    to the success rate; recall for a query with no relevant chunks at all
    counts as 0.
    """
    if not judgments:
        raise ValueError("cannot compute retrieval metrics over zero queries")

    p_sum = r_sum = rr_sum = hits = 0.0
    for j in judgments:
        top = j.returned[:k]
        if len(j.returned) > k:
            raise ValueError(f"ranked list longer than k={k}")
        found = sum(1 for cid in top if cid in j.relevant)
        p_sum += found / k
        r_sum += found / len(j.relevant) if j.relevant else 0.0
        rank = next((i + 1 for i, cid in enumerate(top) if cid in j.relevant), None)
        if rank is not None:
            rr_sum += 1.0 / rank
            hits += 1
    n = len(judgments)
    return RankingMetrics(
        precision_at_k=p_sum / n,
        recall_at_k=r_sum / n,
        mrr=rr_sum / n,
        success_rate=hits / n,
        k=k,
    )
