from flowtriage.retrieval.bm25 import BM25Params, LexicalIndex, bm25_score
from flowtriage.retrieval.vectors import (
    EmbeddingProvider,
    HashEmbedder,
    HttpEmbeddingProvider,
    VectorIndex,
)
from flowtriage.retrieval.rerank import HttpRerankScorer, JaccardReranker, RerankScorer
from flowtriage.retrieval.expansion import ExpansionThesaurus, expand_query
from flowtriage.retrieval.search import (
    Retriever,
    RetrievalResult,
    ScoredChunk,
    build_indexes,
    fuse_scores,
)

__all__ = [
    "BM25Params",
    "EmbeddingProvider",
    "ExpansionThesaurus",
    "HashEmbedder",
    "HttpEmbeddingProvider",
    "HttpRerankScorer",
    "JaccardReranker",
    "LexicalIndex",
    "RerankScorer",
    "RetrievalResult",
    "Retriever",
    "ScoredChunk",
    "VectorIndex",
    "bm25_score",
    "build_indexes",
    "expand_query",
    "fuse_scores",
]
