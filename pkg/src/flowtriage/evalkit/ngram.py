"""Self-implemented n-gram overlap metrics: ROUGE-1/2/L and BLEU."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass


@dataclass(frozen=True)
class MetricScore:
    name: str
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _prf(matches: int, n_candidate: int, n_reference: int, name: str) -> MetricScore:
    precision = matches / n_candidate if n_candidate else 0.0
    recall = matches / n_reference if n_reference else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricScore(name=name, precision=precision, recall=recall, f1=f1)


def rouge_n(candidate: list[str], reference: list[str], n: int) -> MetricScore:
    """ROUGE-n from clipped n-gram overlap counts, F-score at beta = 1."""
    if not reference:
        raise ValueError("reference must be non-empty")
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    matches = sum(min(count, ref[gram]) for gram, count in cand.items())
    return _prf(matches, sum(cand.values()), sum(ref.values()), f"rouge-{n}")


def _lcs_length(a: list[str], b: list[str]) -> int:
    # Single-row dynamic program; quadratic time, linear space.
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(prev[j - 1] + 1)
            else:
                current.append(max(prev[j], current[-1]))
        prev = current
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> MetricScore:
    """ROUGE-L from the longest common subsequence."""
    if not reference:
        raise ValueError("reference must be non-empty")
    lcs = _lcs_length(candidate, reference)
    return _prf(lcs, len(candidate), len(reference), "rouge-l")


def rouge(candidate: list[str], reference: list[str]) -> tuple[MetricScore, MetricScore, MetricScore]:
    """(ROUGE-1, ROUGE-2, ROUGE-L). Empty candidates score zero, not error."""
    return (
        rouge_n(candidate, reference, 1),
        rouge_n(candidate, reference, 2),
        rouge_l(candidate, reference),
    )


def bleu(candidate: list[str], reference: list[str], max_order: int = 4) -> float:
    """BLEU with modified n-gram precision up to 4-grams.

    Orders >= 2 take add-one smoothing on both match and total counts;
    unigram precision stays unsmoothed so a zero-overlap candidate scores
    exactly 0. The brevity penalty exp(1 - r/c) applies when the candidate
    is shorter than the reference.
    """
    if not candidate:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_order + 1):
        cand = _ngrams(candidate, n)
        ref = _ngrams(reference, n)
        matches = sum(min(count, ref[gram]) for gram, count in cand.items())
        total = sum(cand.values())
        if n == 1:
            if matches == 0:
                return 0.0
            p = matches / total
        else:
            p = (matches + 1) / (total + 1)
        log_sum += math.log(p)
    geo_mean = math.exp(log_sum / max_order)

    c, r = len(candidate), len(reference)
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * geo_mean
