import numpy as np
import pytest

from helpers import oracle_wilcoxon
from flowtriage.evalkit.wilcoxon import wilcoxon_signed_rank


def test_six_positive_differences_exact_p():
    pairs = [(float(i + 2), float(i + 1)) for i in range(6)]
    result = wilcoxon_signed_rank(pairs)
    assert result.statistic == 0.0
    assert result.p_value == pytest.approx(0.03125, abs=1e-12)
    assert result.method == "exact"
    assert result.n_effective == 6


def test_antisymmetric_pairs_give_p_one():
    pairs = [(1.0, 3.0), (3.0, 1.0), (2.0, 5.0), (5.0, 2.0), (4.0, 8.0), (8.0, 4.0)]
    result = wilcoxon_signed_rank(pairs)
    assert result.p_value == 1.0


def test_zero_differences_dropped():
    pairs = [(1.0, 1.0), (2.0, 2.0), (5.0, 1.0), (6.0, 1.0), (7.0, 1.0),
             (8.0, 1.0), (9.0, 1.0), (10.0, 1.0)]
    result = wilcoxon_signed_rank(pairs)
    assert result.n_effective == 6


def test_all_zero_differences_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        wilcoxon_signed_rank([(1.0, 1.0), (2.0, 2.0)])


def test_matches_enumeration_oracle_random_cases():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 60:
        n = int(rng.integers(6, 13))
        a = rng.integers(0, 6, n).astype(float)
        b = rng.integers(0, 6, n).astype(float)
        if np.all(a == b):
            continue
        mine = wilcoxon_signed_rank(list(zip(a, b)))
        w, p = oracle_wilcoxon(list(zip(a, b)))
        assert mine.statistic == pytest.approx(w, abs=1e-12)
        assert mine.p_value == pytest.approx(p, abs=1e-12)
        checked += 1


def test_exact_matches_scipy_without_ties():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(6, 16))
        a = rng.normal(0, 1, n)
        b = rng.normal(0, 1, n)
        mine = wilcoxon_signed_rank(list(zip(a, b)))
        reference = scipy_stats.wilcoxon(a, b, zero_method="wilcox", mode="exact")
        assert mine.p_value == pytest.approx(reference.pvalue, abs=1e-12)


def test_normal_approximation_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(2)
    for _ in range(25):
        n = int(rng.integers(21, 60))
        a = rng.normal(0, 1, n)
        b = a + rng.normal(0.2, 1, n)
        mine = wilcoxon_signed_rank(list(zip(a, b)))
        assert mine.method == "normal-approx"
        reference = scipy_stats.wilcoxon(
            a, b, zero_method="wilcox", correction=True, mode="approx"
        )
        assert mine.p_value == pytest.approx(reference.pvalue, abs=1e-10)


def test_approximation_close_to_exact_at_boundary():
    # Independent exact computation (sign enumeration is too slow past
    # n = 20, so compare n = 21 approx to a DP-free exhaustive check on a
    # subsample ... instead verify continuity: approx at n=20-equivalent
    # data stays within a small band of the exact result.
    rng = np.random.default_rng(3)
    a = rng.normal(0, 1, 12)
    b = a + rng.normal(0.4, 1, 12)
    exact = wilcoxon_signed_rank(list(zip(a, b)))
    # recompute with the approx formula by inflating n past the threshold
    from flowtriage.evalkit.wilcoxon import _approx_two_sided_p, _doubled_average_ranks

    diffs = [x - y for x, y in zip(a, b) if x != y]
    doubled = _doubled_average_ranks([abs(d) for d in diffs])
    w2 = min(
        sum(r for r, d in zip(doubled, diffs) if d > 0),
        sum(r for r, d in zip(doubled, diffs) if d < 0),
    )
    approx_p = _approx_two_sided_p(doubled, w2, len(diffs))
    assert approx_p == pytest.approx(exact.p_value, abs=0.03)


def test_p_value_bounds():
    rng = np.random.default_rng(4)
    for _ in range(30):
        n = int(rng.integers(6, 30))
        a = rng.normal(0, 1, n)
        b = rng.normal(0, 1, n)
        result = wilcoxon_signed_rank(list(zip(a, b)))
        assert 0.0 <= result.p_value <= 1.0
        assert result.statistic >= 0.0
