import numpy as np
import pytest

from flowtriage.evalkit.embed_f1 import greedy_embedding_f1
from flowtriage.retrieval.vectors import HashEmbedder


class TableEmbedder:
    """Fixed per-token vectors, for hand-computable similarity matrices."""

    deterministic = True
    provider_id = "table"

    def __init__(self, table):
        self.table = {t: np.asarray(v, dtype=np.float64) for t, v in table.items()}
        self.width = len(next(iter(table.values())))

    def embed(self, text):
        return self.table[text]


def test_identical_sequences_score_one():
    embedder = HashEmbedder(width=32, seed=0)
    tokens = "alpha beta gamma".split()
    score = greedy_embedding_f1(tokens, tokens, embedder)
    assert score.precision == pytest.approx(1.0, abs=1e-12)
    assert score.recall == pytest.approx(1.0, abs=1e-12)
    assert score.f1 == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_embeddings_score_zero():
    embedder = TableEmbedder({
        "a": [1, 0, 0, 0], "b": [0, 1, 0, 0],
        "x": [0, 0, 1, 0], "y": [0, 0, 0, 1],
    })
    score = greedy_embedding_f1(["a", "b"], ["x", "y"], embedder)
    assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)


def test_hand_built_three_by_three_matrix():
    # Unit vectors chosen so the candidate-reference cosine matrix is
    #   c1: (1.0, 0.0, 0.0)   c2: (0.0, 0.6, 0.8)   c3: (0.0, 0.8, 0.6)
    embedder = TableEmbedder({
        "c1": [1, 0, 0], "c2": [0, 0.6, 0.8], "c3": [0, 0.8, 0.6],
        "r1": [1, 0, 0], "r2": [0, 1, 0], "r3": [0, 0, 1],
    })
    score = greedy_embedding_f1(["c1", "c2", "c3"], ["r1", "r2", "r3"], embedder)
    # max per candidate row: 1.0, 0.8, 0.8 -> precision 13/15
    # max per reference column: 1.0, 0.8, 0.8 -> recall 13/15
    assert score.precision == pytest.approx(13 / 15, abs=1e-12)
    assert score.recall == pytest.approx(13 / 15, abs=1e-12)
    assert score.f1 == pytest.approx(13 / 15, abs=1e-12)


def test_negative_cosines_floored_at_zero():
    embedder = TableEmbedder({"a": [1, 0], "z": [-1, 0]})
    score = greedy_embedding_f1(["a"], ["z"], embedder)
    assert score.f1 == 0.0


def test_empty_side_scores_zero():
    embedder = HashEmbedder(width=16, seed=0)
    assert greedy_embedding_f1([], ["x"], embedder).f1 == 0.0
    assert greedy_embedding_f1(["x"], [], embedder).f1 == 0.0


def test_swap_exchanges_precision_recall():
    embedder = HashEmbedder(width=64, seed=5)
    cand = "rate limiting stops floods".split()
    ref = "rate limiting and syn cookies stop flood attacks".split()
    fwd = greedy_embedding_f1(cand, ref, embedder)
    rev = greedy_embedding_f1(ref, cand, embedder)
    assert fwd.precision == pytest.approx(rev.recall, abs=1e-12)
    assert fwd.recall == pytest.approx(rev.precision, abs=1e-12)
    assert fwd.f1 == pytest.approx(rev.f1, abs=1e-12)


def test_scores_bounded_unit_interval():
    embedder = HashEmbedder(width=16, seed=1)
    rng = np.random.default_rng(0)
    vocab = [f"t{i}" for i in range(12)]
    for _ in range(30):
        cand = [vocab[int(rng.integers(0, 12))] for _ in range(int(rng.integers(1, 15)))]
        ref = [vocab[int(rng.integers(0, 12))] for _ in range(int(rng.integers(1, 15)))]
        score = greedy_embedding_f1(cand, ref, embedder)
        assert 0.0 <= score.precision <= 1.0
        assert 0.0 <= score.recall <= 1.0
        assert 0.0 <= score.f1 <= 1.0
