import numpy as np
import pytest

from helpers import oracle_bleu, oracle_rouge_l, oracle_rouge_n
from flowtriage.evalkit.ngram import bleu, rouge, rouge_l, rouge_n


def random_pair(rng, vocab=8, lo=5, hi=40):
    words = [f"w{i}" for i in range(vocab)]
    def seq():
        return [words[int(rng.integers(0, vocab))] for _ in range(int(rng.integers(lo, hi)))]
    return seq(), seq()


# --------------------------------------------------------------------- ROUGE


def test_identical_texts_score_one():
    tokens = "the quick brown fox jumps".split()
    r1, r2, rl = rouge(tokens, tokens)
    assert (r1.f1, r2.f1, rl.f1) == (1.0, 1.0, 1.0)


def test_disjoint_vocabulary_scores_zero():
    r1, r2, rl = rouge("aa bb cc".split(), "dd ee ff".split())
    assert (r1.f1, r2.f1, rl.f1) == (0.0, 0.0, 0.0)


def test_the_cat_example():
    score = rouge_n("the cat".split(), "the cat sat".split(), 1)
    assert score.precision == pytest.approx(1.0)
    assert score.recall == pytest.approx(2 / 3)
    assert score.f1 == pytest.approx(0.8)


def test_empty_candidate_scores_zero_not_error():
    r1, r2, rl = rouge([], "some reference".split())
    assert (r1.f1, r2.f1, rl.f1) == (0.0, 0.0, 0.0)


def test_empty_reference_errors():
    with pytest.raises(ValueError):
        rouge_n(["a"], [], 1)


def test_rouge_matches_oracles_on_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(60):
        cand, ref = random_pair(rng)
        for n in (1, 2):
            mine = rouge_n(cand, ref, n)
            p, r, f = oracle_rouge_n(cand, ref, n)
            assert mine.precision == pytest.approx(p, abs=1e-9)
            assert mine.recall == pytest.approx(r, abs=1e-9)
            assert mine.f1 == pytest.approx(f, abs=1e-9)
        mine_l = rouge_l(cand, ref)
        p, r, f = oracle_rouge_l(cand, ref)
        assert mine_l.precision == pytest.approx(p, abs=1e-9)
        assert mine_l.f1 == pytest.approx(f, abs=1e-9)


def test_swapping_sides_swaps_precision_and_recall():
    rng = np.random.default_rng(1)
    for _ in range(30):
        cand, ref = random_pair(rng)
        fwd = rouge_n(cand, ref, 1)
        rev = rouge_n(ref, cand, 1)
        assert fwd.precision == pytest.approx(rev.recall, abs=1e-12)
        assert fwd.recall == pytest.approx(rev.precision, abs=1e-12)
        assert fwd.f1 == pytest.approx(rev.f1, abs=1e-12)


# ---------------------------------------------------------------------- BLEU


def test_bleu_identity_is_exactly_one():
    tokens = "alpha beta gamma delta".split()
    assert bleu(tokens, tokens) == 1.0
    short = "alpha beta".split()  # shorter than the max n-gram order
    assert bleu(short, short) == 1.0


def test_bleu_zero_unigram_overlap_is_zero():
    assert bleu("aa bb".split(), "cc dd".split()) == 0.0


def test_bleu_empty_candidate_is_zero():
    assert bleu([], "ref tokens".split()) == 0.0


def test_bleu_ten_token_fixture_matches_oracle():
    cand = "the service saw a sustained flood of syn packets today".split()
    ref = "the service saw a sustained flood of tcp syn packets".split()
    assert bleu(cand, ref) == pytest.approx(oracle_bleu(cand, ref), abs=1e-9)


def test_bleu_matches_oracle_on_random_pairs():
    rng = np.random.default_rng(2)
    for _ in range(60):
        cand, ref = random_pair(rng)
        assert bleu(cand, ref) == pytest.approx(oracle_bleu(cand, ref), abs=1e-9)


def test_bleu_brevity_penalty_applies():
    ref = "a b c d e f g h".split()
    cand = ref[:4]  # perfect prefix, half the length
    score = bleu(cand, ref)
    assert score < 1.0


def test_bleu_bounded_by_unigram_precision_on_report_like_pairs():
    # Generated/reference report pairs share most vocabulary; in that
    # regime the smoothed orders stay below unigram precision.
    rng = np.random.default_rng(3)
    for _ in range(60):
        cand, ref = random_pair(rng, vocab=6, lo=15, hi=45)
        matches = sum(min(cand.count(w), ref.count(w)) for w in set(cand))
        p1 = matches / len(cand)
        assert bleu(cand, ref) <= p1 + 1e-9


def test_scores_bounded():
    rng = np.random.default_rng(4)
    for _ in range(40):
        cand, ref = random_pair(rng)
        assert 0.0 <= bleu(cand, ref) <= 1.0
        for metric in rouge(cand, ref):
            assert 0.0 <= metric.f1 <= 1.0
