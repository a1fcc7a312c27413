"""Greedy token-embedding F1: a corpus-free semantic similarity score.

For each candidate token, take the best cosine similarity against any
reference token (floored at 0); precision is the mean of those maxima,
recall the symmetric quantity, F1 their harmonic mean. No idf weighting or
baseline rescaling is applied, and outputs are labeled as greedy embedding
F1 rather than any specific pretrained-model score.
"""
from __future__ import annotations

import numpy as np

from flowtriage.evalkit.ngram import MetricScore
from flowtriage.retrieval.vectors import EmbeddingProvider


def greedy_embedding_f1(
    candidate: list[str],
    reference: list[str],
    token_embedder: EmbeddingProvider,
) -> MetricScore:
    if not candidate or not reference:
        return MetricScore(name="greedy-embedding-f1", precision=0.0, recall=0.0, f1=0.0)

    sim = _similarity_matrix(candidate, reference, token_embedder)
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricScore(name="greedy-embedding-f1", precision=precision, recall=recall, f1=f1)


def _similarity_matrix(
    candidate: list[str], reference: list[str], embedder: EmbeddingProvider
) -> np.ndarray:
    cache: dict[str, np.ndarray] = {}

    def unit(token: str) -> np.ndarray:
        vec = cache.get(token)
        if vec is None:
            raw = np.asarray(embedder.embed(token), dtype=np.float64)
            norm = np.linalg.norm(raw)
            vec = raw / norm if norm > 0 else raw
            cache[token] = vec
        return vec

    C = np.stack([unit(t) for t in candidate])
    R = np.stack([unit(t) for t in reference])
    # Cosines floored at 0 to keep the score inside [0, 1].
    return np.maximum(C @ R.T, 0.0)
