"""Candidate rerank scorers: deterministic token-overlap double and HTTP client."""
from __future__ import annotations

import time
from typing import Protocol, runtime_checkable

from flowtriage.text import tokenize


@runtime_checkable
class RerankScorer(Protocol):
    scorer_id: str
    deterministic: bool

    def score(self, query: str, chunk_text: str) -> float: ...


class RerankError(RuntimeError):
    pass


class JaccardReranker:
    """Jaccard token-set overlap between query and chunk, already in [0, 1]."""

    scorer_id = "jaccard"
    deterministic = True

    def score(self, query: str, chunk_text: str) -> float:
        q = set(tokenize(query))
        c = set(tokenize(chunk_text))
        if not q or not c:
            return 0.0
        return len(q & c) / len(q | c)


class HttpRerankScorer:
    """Client for a local cross-encoder service.

    Protocol: POST {"query": ..., "text": ...}; response {"score": s} with
    s in [0, 1].
    """

    deterministic = False

    def __init__(
        self,
        endpoint: str,
        timeout: float = 10.0,
        retries: int = 2,
        scorer_id: str = "http-reranker",
        client=None,
    ) -> None:
        import httpx

        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self.scorer_id = scorer_id
        self._client = client or httpx.Client(timeout=timeout)

    def score(self, query: str, chunk_text: str) -> float:
        import httpx

        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(
                    self.endpoint, json={"query": query, "text": chunk_text}
                )
                response.raise_for_status()
                value = float(response.json()["score"])
                if not 0.0 <= value <= 1.0:
                    raise RerankError(f"rerank score {value} outside [0, 1]")
                return value
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(0.05 * (attempt + 1))
        raise RerankError(f"rerank request failed after {self.retries + 1} attempts: {last_error}")
