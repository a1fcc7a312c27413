"""Exercise the HTTP provider protocol against a live local stub service."""
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from flowtriage.reporting.generation import (
    GenerationLimits,
    HttpGenerationClient,
)
from flowtriage.retrieval.rerank import HttpRerankScorer, RerankError
from flowtriage.retrieval.vectors import EmbeddingError, HttpEmbeddingProvider


class StubHandler(BaseHTTPRequestHandler):
    fail_next = 0

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        if StubHandler.fail_next > 0:
            StubHandler.fail_next -= 1
            self.send_response(500)
            self.end_headers()
            return
        if self.path == "/embed":
            vec = [float(len(payload["text"]))] + [0.0] * 7
            body = {"vector": vec}
        elif self.path == "/rerank":
            body = {"score": 0.75}
        elif self.path == "/generate":
            body = {
                "text": f"echo:{payload['model_id']}:{len(payload['prompt'])}",
                "word_count": 3,
            }
        else:
            self.send_response(404)
            self.end_headers()
            return
        data = json.dumps(body).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def server():
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), StubHandler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}"
    httpd.shutdown()


def test_http_embedding_round_trip(server):
    provider = HttpEmbeddingProvider(f"{server}/embed", width=8, retries=0)
    vec = provider.embed("hello")
    assert vec.shape == (8,)
    assert vec[0] == 5.0


def test_http_embedding_width_mismatch(server):
    provider = HttpEmbeddingProvider(f"{server}/embed", width=16, retries=0)
    with pytest.raises(EmbeddingError, match="width"):
        provider.embed("hello")


def test_http_embedding_retries_then_succeeds(server):
    provider = HttpEmbeddingProvider(f"{server}/embed", width=8, retries=2)
    StubHandler.fail_next = 2
    vec = provider.embed("abc")
    assert vec[0] == 3.0


def test_http_embedding_exhausted_retries(server):
    provider = HttpEmbeddingProvider(f"{server}/embed", width=8, retries=1)
    StubHandler.fail_next = 5
    with pytest.raises(EmbeddingError, match="after 2 attempts"):
        provider.embed("abc")
    StubHandler.fail_next = 0


def test_http_reranker(server):
    scorer = HttpRerankScorer(f"{server}/rerank", retries=0)
    assert scorer.score("q", "text") == 0.75


def test_http_generation(server):
    client = HttpGenerationClient(f"{server}/generate", model_id="m7", retries=0)
    out = client.generate("p" * 10, GenerationLimits())
    assert out == "echo:m7:10"


def test_unreachable_endpoint_raises():
    provider = HttpEmbeddingProvider("http://127.0.0.1:1/embed", width=4, retries=0, timeout=0.2)
    with pytest.raises(EmbeddingError):
        provider.embed("x")
    scorer = HttpRerankScorer("http://127.0.0.1:1/rerank", retries=0, timeout=0.2)
    with pytest.raises(RerankError):
        scorer.score("a", "b")
