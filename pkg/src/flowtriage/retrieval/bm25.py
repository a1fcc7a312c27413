"""Okapi BM25 over an inverted index of knowledge chunks.

Scores follow

    score(D, Q) = sum_i IDF(q_i) * f(q_i, D) * (k1 + 1)
                  / (f(q_i, D) + k1 * (1 - b + b * |D| / avgdl))

with IDF(q) = ln((N - n_q + 0.5) / (n_q + 0.5) + 1), the non-negative Okapi
form. Query terms contribute once per occurrence in the query.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from flowtriage.knowledge import Chunk
from flowtriage.text import tokenize


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.5
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


@dataclass
class LexicalIndex:
    """Postings plus the corpus statistics BM25 needs."""

    postings: dict[str, list[tuple[int, int]]]  # term -> [(chunk position, tf)]
    doc_lengths: list[int]
    chunk_ids: list[str]
    avgdl: float
    n_docs: int
    doc_frequencies: dict[str, int] = field(default_factory=dict)

    _position: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._position:
            self._position = {cid: i for i, cid in enumerate(self.chunk_ids)}

    def position(self, chunk_id: str) -> int:
        try:
            return self._position[chunk_id]
        except KeyError:
            raise KeyError(f"chunk {chunk_id!r} not in lexical index") from None

    def idf(self, term: str) -> float:
        n = self.doc_frequencies.get(term, 0)
        return math.log((self.n_docs - n + 0.5) / (n + 0.5) + 1.0)

    def term_frequency(self, term: str, position: int) -> int:
        for pos, tf in self.postings.get(term, ()):
            if pos == position:
                return tf
        return 0


def build_lexical_index(chunks: Iterable[Chunk]) -> LexicalIndex:
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: list[int] = []
    chunk_ids: list[str] = []
    for pos, chunk in enumerate(chunks):
        tokens = tokenize(chunk.text)
        doc_lengths.append(len(tokens))
        chunk_ids.append(chunk.chunk_id)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((pos, tf))
    if not chunk_ids:
        raise ValueError("cannot build a lexical index over an empty knowledge base")
    return LexicalIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        chunk_ids=chunk_ids,
        avgdl=sum(doc_lengths) / len(doc_lengths),
        n_docs=len(doc_lengths),
        doc_frequencies={term: len(plist) for term, plist in postings.items()},
    )


def bm25_score(
    query_terms: list[str],
    chunk_id: str,
    index: LexicalIndex,
    params: BM25Params = BM25Params(),
) -> float:
    """Score one chunk against a tokenized query."""
    pos = index.position(chunk_id)
    length_norm = params.k1 * (
        1.0 - params.b + params.b * index.doc_lengths[pos] / index.avgdl
    )
    score = 0.0
    for term in query_terms:
        tf = index.term_frequency(term, pos)
        if tf == 0:
            continue
        score += index.idf(term) * tf * (params.k1 + 1.0) / (tf + length_norm)
    return score


def bm25_all_scores(
    query_terms: list[str],
    index: LexicalIndex,
    params: BM25Params = BM25Params(),
) -> dict[int, float]:
    """Accumulate scores for every chunk touched by any query term."""
    scores: dict[int, float] = {}
    norm_base = 1.0 - params.b
    norm_scale = params.b / index.avgdl
    for term in query_terms:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for pos, tf in plist:
            denom = tf + params.k1 * (norm_base + norm_scale * index.doc_lengths[pos])
            scores[pos] = scores.get(pos, 0.0) + idf * tf * (params.k1 + 1.0) / denom
    return scores


def bm25_top_n(
    query_terms: list[str],
    index: LexicalIndex,
    n: int,
    params: BM25Params = BM25Params(),
) -> list[tuple[str, float]]:
    """Top-n (chunk_id, score) pairs, ties broken by chunk id."""
    scores = bm25_all_scores(query_terms, index, params)
    ranked = sorted(
        ((index.chunk_ids[pos], s) for pos, s in scores.items()),
        key=lambda item: (-item[1], item[0]),
    )
    return ranked[:n]


def query_terms(text: str) -> list[str]:
    return tokenize(text)
