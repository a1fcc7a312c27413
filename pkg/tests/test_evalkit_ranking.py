import numpy as np
import pytest

from flowtriage.evalkit.ranking import RetrievalJudgment, retrieval_metrics


def j(relevant, returned):
    return RetrievalJudgment(relevant=frozenset(relevant), returned=tuple(returned))


def test_first_relevant_at_rank_one():
    metrics = retrieval_metrics([j({"a"}, ["a", "x", "y", "z", "w"])], k=5)
    assert metrics.mrr == 1.0
    assert metrics.success_rate == 1.0


def test_three_of_five_returned_four_relevant_total():
    metrics = retrieval_metrics(
        [j({"a", "b", "c", "d"}, ["a", "x", "b", "y", "c"])], k=5
    )
    assert metrics.precision_at_k == pytest.approx(0.6)
    assert metrics.recall_at_k == pytest.approx(0.75)


def test_no_relevant_returned():
    metrics = retrieval_metrics([j({"a"}, ["x", "y", "z", "w", "v"])], k=5)
    assert metrics.mrr == 0.0
    assert metrics.success_rate == 0.0
    assert metrics.precision_at_k == 0.0


def test_empty_judgment_set_errors():
    with pytest.raises(ValueError):
        retrieval_metrics([], k=5)


def test_overlong_ranked_list_errors():
    with pytest.raises(ValueError, match="longer than k"):
        retrieval_metrics([j({"a"}, ["a", "b", "c", "d", "e", "f"])], k=5)


def test_mrr_ignores_later_relevant():
    metrics = retrieval_metrics([j({"a", "b"}, ["x", "a", "b"])], k=5)
    assert metrics.mrr == pytest.approx(0.5)


def test_averages_over_queries_match_direct_counting():
    rng = np.random.default_rng(0)
    ids = [f"c{i}" for i in range(20)]
    judgments = []
    for _ in range(40):
        relevant = set(rng.choice(ids, size=int(rng.integers(1, 6)), replace=False))
        returned = list(rng.choice(ids, size=5, replace=False))
        judgments.append(j(relevant, returned))
    metrics = retrieval_metrics(judgments, k=5)

    # direct counting, independently of the implementation
    p = r = rr = hits = 0.0
    for judgment in judgments:
        found = [c for c in judgment.returned if c in judgment.relevant]
        p += len(found) / 5
        r += len(found) / len(judgment.relevant)
        first = next(
            (i + 1 for i, c in enumerate(judgment.returned) if c in judgment.relevant), None
        )
        if first:
            rr += 1.0 / first
            hits += 1
    n = len(judgments)
    assert metrics.precision_at_k == pytest.approx(p / n, abs=1e-9)
    assert metrics.recall_at_k == pytest.approx(r / n, abs=1e-9)
    assert metrics.mrr == pytest.approx(rr / n, abs=1e-9)
    assert metrics.success_rate == pytest.approx(hits / n, abs=1e-9)
