"""Hybrid retrieval: expansion, dual-stage candidates, fusion, reranking.

The pipeline runs, in order: query expansion; BM25 top-n and vector top-n
candidate generation (n = 30 at both stages); candidate union dedup by
chunk id; score fusion 0.60 * semantic + 0.40 * normalized lexical; rerank
of the fused top 30; final top-k by rerank score. When fewer than three
returned chunks clear rerank score 0.5, a designated fallback chunk set is
attached and flagged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from flowtriage.knowledge import Chunk, KnowledgeBase
from flowtriage.retrieval.bm25 import (
    BM25Params,
    LexicalIndex,
    bm25_all_scores,
    build_lexical_index,
)
from flowtriage.retrieval.expansion import ExpansionThesaurus, expand_query
from flowtriage.retrieval.rerank import RerankScorer
from flowtriage.retrieval.vectors import EmbeddingProvider, VectorIndex
from flowtriage.text import tokenize

CANDIDATE_DEPTH = 30
SEMANTIC_WEIGHT = 0.60
LEXICAL_WEIGHT = 0.40
FALLBACK_MIN_CONFIDENT = 3
FALLBACK_RERANK_THRESHOLD = 0.5


class RetrievalError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScoredChunk:
    """One candidate with its lexical, semantic, fused, and rerank scores.

    `sem_sim` is the cosine similarity already mapped from [-1, 1] to
    [0, 1], so fused == 0.60 * sem_sim + 0.40 * bm25_norm holds exactly.
    """

    chunk_id: str
    bm25_norm: float
    sem_sim: float
    fused: float
    rerank: float | None = None

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "bm25_norm": self.bm25_norm,
            "sem_sim": self.sem_sim,
            "fused": self.fused,
            "rerank": self.rerank,
        }


@dataclass(frozen=True)
class RetrievalResult:
    query: str
    expanded_query: str
    ranked: tuple[ScoredChunk, ...]
    fallback_used: bool
    fallback_chunk_ids: tuple[str, ...] = ()

    def context_chunk_ids(self) -> list[str]:
        """Chunk ids to feed the knowledge block, fallback included."""
        ids = [sc.chunk_id for sc in self.ranked]
        if self.fallback_used:
            ids.extend(cid for cid in self.fallback_chunk_ids if cid not in ids)
        return ids

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "expanded_query": self.expanded_query,
            "ranked": [sc.to_dict() for sc in self.ranked],
            "fallback_used": self.fallback_used,
            "fallback_chunk_ids": list(self.fallback_chunk_ids),
        }


def fuse_scores(
    candidates: list[tuple[str, float, float]],
) -> list[ScoredChunk]:
    """Fuse raw (chunk_id, bm25, cosine) triples into a ranked candidate list.

    BM25 scores are min-max normalized over the candidate set (all 1.0 when
    the set is a single candidate or the scores are constant); cosine maps
    through (s + 1) / 2. Sorted by fused score descending, ties by chunk id.
    """
    if not candidates:
        raise RetrievalError("cannot fuse an empty candidate set")
    raw_bm25 = [c[1] for c in candidates]
    lo, hi = min(raw_bm25), max(raw_bm25)
    span = hi - lo

    fused: list[ScoredChunk] = []
    for chunk_id, bm25_raw, cosine in candidates:
        bm25_norm = 1.0 if span == 0.0 else (bm25_raw - lo) / span
        sem = (cosine + 1.0) / 2.0
        fused.append(
            ScoredChunk(
                chunk_id=chunk_id,
                bm25_norm=bm25_norm,
                sem_sim=sem,
                fused=SEMANTIC_WEIGHT * sem + LEXICAL_WEIGHT * bm25_norm,
            )
        )
    fused.sort(key=lambda sc: (-sc.fused, sc.chunk_id))
    return fused


def build_indexes(
    kb: KnowledgeBase, provider: EmbeddingProvider
) -> tuple[LexicalIndex, VectorIndex]:
    """Build the postings and the embedding matrix for a knowledge base."""
    if len(kb.chunks) == 0:
        raise RetrievalError("cannot index an empty knowledge base")
    lexical = build_lexical_index(kb.chunks)
    vectors = np.empty((len(kb.chunks), provider.width), dtype=np.float64)
    for i, chunk in enumerate(kb.chunks):
        try:
            vectors[i] = provider.embed(chunk.text)
        except Exception as exc:
            raise RetrievalError(f"embedding failed for chunk {chunk.chunk_id!r}: {exc}") from exc
    return lexical, VectorIndex(vectors, [c.chunk_id for c in kb.chunks])


@dataclass
class Retriever:
    """Reentrant hybrid retriever over immutable indexes."""

    kb: KnowledgeBase
    lexical: LexicalIndex
    vectors: VectorIndex
    provider: EmbeddingProvider
    reranker: RerankScorer
    thesaurus: ExpansionThesaurus | None = None
    params: BM25Params = field(default_factory=BM25Params)
    fallback_chunk_ids: tuple[str, ...] = ()

    @classmethod
    def build(
        cls,
        kb: KnowledgeBase,
        provider: EmbeddingProvider,
        reranker: RerankScorer,
        thesaurus: ExpansionThesaurus | None = None,
        params: BM25Params = BM25Params(),
        fallback_chunk_ids: tuple[str, ...] = (),
    ) -> "Retriever":
        lexical, vectors = build_indexes(kb, provider)
        for cid in fallback_chunk_ids:
            kb.by_id(cid)  # fail fast on unresolvable fallback ids
        return cls(
            kb=kb,
            lexical=lexical,
            vectors=vectors,
            provider=provider,
            reranker=reranker,
            thesaurus=thesaurus,
            params=params,
            fallback_chunk_ids=fallback_chunk_ids,
        )

    def retrieve(self, query: str, k: int = 5) -> RetrievalResult:
        """Run the full pipeline for one query."""
        if k < 1:
            raise ValueError("k must be >= 1")
        expanded = expand_query(query, self.thesaurus) if self.thesaurus else query
        terms = tokenize(expanded)

        # Stage 1: lexical candidates. Only chunks matching at least one
        # query term participate (their scores are strictly positive).
        lex_scores = bm25_all_scores(terms, self.lexical, self.params)
        lex_ranked = sorted(
            ((self.lexical.chunk_ids[pos], s) for pos, s in lex_scores.items()),
            key=lambda item: (-item[1], item[0]),
        )[:CANDIDATE_DEPTH]

        # Stage 2: semantic candidates from the expanded query embedding.
        query_vec = self.provider.embed(expanded)
        sem_ranked = self.vectors.top_n(query_vec, CANDIDATE_DEPTH)

        candidate_ids = sorted({cid for cid, _ in lex_ranked} | {cid for cid, _ in sem_ranked})

        # Fusion over the deduplicated union; raw scores recomputed for
        # candidates that only surfaced in one stage.
        triples = []
        for cid in candidate_ids:
            pos = self.lexical.position(cid)
            bm25_raw = lex_scores.get(pos, 0.0)
            cosine = self.vectors.cosine(query_vec, cid)
            triples.append((cid, bm25_raw, cosine))
        fused = fuse_scores(triples)[:CANDIDATE_DEPTH]

        # Rerank the fused shortlist against the original query.
        reranked = []
        for sc in fused:
            try:
                score = self.reranker.score(query, self.kb.by_id(sc.chunk_id).text)
            except Exception as exc:
                raise RetrievalError(
                    f"rerank failed for chunk {sc.chunk_id!r}: {exc}"
                ) from exc
            reranked.append(
                ScoredChunk(
                    chunk_id=sc.chunk_id,
                    bm25_norm=sc.bm25_norm,
                    sem_sim=sc.sem_sim,
                    fused=sc.fused,
                    rerank=score,
                )
            )
        reranked.sort(key=lambda sc: (-(sc.rerank or 0.0), sc.chunk_id))
        top = tuple(reranked[:k])

        confident = sum(
            1 for sc in top if sc.rerank is not None and sc.rerank > FALLBACK_RERANK_THRESHOLD
        )
        fallback_used = confident < FALLBACK_MIN_CONFIDENT
        return RetrievalResult(
            query=query,
            expanded_query=expanded,
            ranked=top,
            fallback_used=fallback_used,
            fallback_chunk_ids=self.fallback_chunk_ids if fallback_used else (),
        )
