"""Embedding providers and the flat cosine vector index.

Providers are pluggable: the deterministic feature-hash embedder backs CI
and desk-scale runs; the HTTP provider speaks the minimal JSON protocol of
a local embedding service. The index is an exact cosine scan, adequate for
knowledge bases in the low tens of thousands of chunks and deterministic
by construction.
"""
from __future__ import annotations

import hashlib
import time
from typing import Protocol, runtime_checkable

import numpy as np

from flowtriage.text import tokenize


@runtime_checkable
class EmbeddingProvider(Protocol):
    width: int
    deterministic: bool
    provider_id: str

    def embed(self, text: str) -> np.ndarray: ...


class EmbeddingError(RuntimeError):
    pass


class HashEmbedder:
    """Seeded bag-of-words feature hashing, L2-normalized.

    Each token hashes to one coordinate (values accumulate), so texts with
    shared vocabulary land near each other under cosine similarity. Fully
    deterministic for a fixed seed and width.
    """

    def __init__(self, width: int = 768, seed: int = 0) -> None:
        if width <= 0:
            raise ValueError("width must be positive")
        self.width = width
        self.seed = seed
        self.deterministic = True
        self.provider_id = f"hash-{width}-{seed}"
        self._slot_cache: dict[str, int] = {}

    def _slot(self, token: str) -> int:
        slot = self._slot_cache.get(token)
        if slot is None:
            digest = hashlib.blake2b(
                token.encode("utf-8"), key=str(self.seed).encode("utf-8"), digest_size=8
            ).digest()
            slot = int.from_bytes(digest, "big") % self.width
            self._slot_cache[token] = slot
        return slot

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.width, dtype=np.float64)
        for token in tokenize(text):
            vec[self._slot(token)] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec


class HttpEmbeddingProvider:
    """Client for a local embedding service.

    Protocol: POST {"text": ...} to the endpoint; the response is a JSON
    document {"vector": [...]} of the configured width.
    """

    def __init__(
        self,
        endpoint: str,
        width: int = 768,
        timeout: float = 10.0,
        retries: int = 2,
        provider_id: str = "http-embedder",
        client=None,
    ) -> None:
        import httpx

        self.endpoint = endpoint
        self.width = width
        self.timeout = timeout
        self.retries = retries
        self.deterministic = False
        self.provider_id = provider_id
        self._client = client or httpx.Client(timeout=timeout)

    def embed(self, text: str) -> np.ndarray:
        import httpx

        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(self.endpoint, json={"text": text})
                response.raise_for_status()
                vector = np.asarray(response.json()["vector"], dtype=np.float64)
                if vector.shape != (self.width,):
                    raise EmbeddingError(
                        f"embedding width {vector.shape} does not match configured "
                        f"width {self.width}"
                    )
                return vector
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(0.05 * (attempt + 1))
        raise EmbeddingError(f"embedding request failed after {self.retries + 1} attempts: {last_error}")


class VectorIndex:
    """Exact nearest-neighbor search under cosine similarity."""

    def __init__(self, vectors: np.ndarray, chunk_ids: list[str]) -> None:
        matrix = np.asarray(vectors, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(chunk_ids):
            raise ValueError("vector matrix must have one row per chunk id")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("vector index entries must be finite")
        norms = np.linalg.norm(matrix, axis=1)
        safe = np.where(norms == 0.0, 1.0, norms)
        self._unit = matrix / safe[:, None]
        self.chunk_ids = list(chunk_ids)
        self.width = matrix.shape[1]
        self._position = {cid: i for i, cid in enumerate(chunk_ids)}

    def cosine(self, query_vec: np.ndarray, chunk_id: str) -> float:
        return float(self._cosine_all(query_vec)[self._position[chunk_id]])

    def _cosine_all(self, query_vec: np.ndarray) -> np.ndarray:
        q = np.asarray(query_vec, dtype=np.float64)
        norm = np.linalg.norm(q)
        if norm > 0:
            q = q / norm
        return self._unit @ q

    def top_n(self, query_vec: np.ndarray, n: int) -> list[tuple[str, float]]:
        sims = self._cosine_all(query_vec)
        ranked = sorted(
            zip(self.chunk_ids, sims.tolist()), key=lambda item: (-item[1], item[0])
        )
        return ranked[:n]
