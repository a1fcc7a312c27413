"""Paired Wilcoxon signed-rank test.

Zero differences are dropped; tied absolute differences receive average
ranks. The statistic is W = min(W+, W-). For n <= 20 effective pairs the
two-sided p comes from the exact null distribution (computed by dynamic
programming over rank sums, equivalent to enumerating all 2^n sign
patterns); beyond that, a normal approximation with continuity and tie
corrections is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

EXACT_MAX_N = 20


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # W = min(W+, W-)
    p_value: float
    n_effective: int
    method: str  # "exact" or "normal-approx"

    def to_dict(self) -> dict:
        return {
            "W": self.statistic,
            "p_value": self.p_value,
            "n_effective": self.n_effective,
            "method": self.method,
        }


def wilcoxon_signed_rank(pairs: list[tuple[float, float]]) -> WilcoxonResult:
    diffs = [a - b for a, b in pairs if a != b]
    if not diffs:
        raise ValueError("degenerate pairing: all differences are zero")
    n = len(diffs)

    doubled = _doubled_average_ranks([abs(d) for d in diffs])
    w_plus2 = sum(r for r, d in zip(doubled, diffs) if d > 0)
    w_minus2 = sum(r for r, d in zip(doubled, diffs) if d < 0)
    w2 = min(w_plus2, w_minus2)

    if n <= EXACT_MAX_N:
        p = _exact_two_sided_p(doubled, w2)
        method = "exact"
    else:
        p = _approx_two_sided_p(doubled, w2, n)
        method = "normal-approx"
    return WilcoxonResult(statistic=w2 / 2.0, p_value=p, n_effective=n, method=method)


def _doubled_average_ranks(abs_diffs: list[float]) -> list[int]:
    """Average ranks of |d|, doubled so tied (x.5) ranks stay integral."""
    order = sorted(range(len(abs_diffs)), key=lambda i: abs_diffs[i])
    doubled = [0] * len(abs_diffs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs_diffs[order[j + 1]] == abs_diffs[order[i]]:
            j += 1
        # Positions i..j share ranks i+1..j+1; the average doubled is i+j+2.
        for k in range(i, j + 1):
            doubled[order[k]] = i + j + 2
        i = j + 1
    return doubled


def _exact_two_sided_p(doubled_ranks: list[int], w2_observed: int) -> float:
    """P(min(W+, W-) <= w) under the exact symmetric null."""
    total = sum(doubled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled_ranks:
        for s in range(total - r, -1, -1):
            if counts[s]:
                counts[s + r] += counts[s]
    lower_tail = sum(counts[: w2_observed + 1])
    p = 2.0 * lower_tail / (2 ** len(doubled_ranks))
    return min(1.0, p)


def _approx_two_sided_p(doubled_ranks: list[int], w2: int, n: int) -> float:
    w = w2 / 2.0
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    # Tie correction over groups of equal absolute differences.
    group_sizes: dict[int, int] = {}
    for r in doubled_ranks:
        group_sizes[r] = group_sizes.get(r, 0) + 1
    tie_sizes = [size for size in group_sizes.values() if size > 1]
    variance -= sum(t**3 - t for t in tie_sizes) / 48.0
    if variance <= 0:
        return 1.0
    # Continuity correction: shift half a rank toward the mean.
    z = (w - mean + 0.5) / math.sqrt(variance)
    p = 2.0 * _normal_cdf(z)
    return min(1.0, p)


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))
