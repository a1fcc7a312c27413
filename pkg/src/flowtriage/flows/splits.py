"""Stratified splitting, label remapping, and class rebalancing."""
from __future__ import annotations

import math
from collections import Counter

import numpy as np

from flowtriage.flows.types import BalancingPlan, ClassLabel, DatasetSplit

# Source ten-class vocabulary mapped onto the three-class scheme. Complex
# multi-stage attacks land under DDoS; direct volumetric attacks (and the
# residual low-volume classes) under DoS.
_UNSW_REMAP = {
    "normal": ClassLabel.BENIGN,
    "fuzzers": ClassLabel.DDOS,
    "exploits": ClassLabel.DDOS,
    "generic": ClassLabel.DDOS,
    "reconnaissance": ClassLabel.DDOS,
    "dos": ClassLabel.DOS,
    "backdoor": ClassLabel.DOS,
    "backdoors": ClassLabel.DOS,
    "shellcode": ClassLabel.DOS,
    "worms": ClassLabel.DOS,
    "analysis": ClassLabel.DOS,
}


def remap_unsw_label(original: str) -> ClassLabel:
    """Map one of the ten source attack categories to the three-class scheme."""
    key = original.strip().lower()
    try:
        return _UNSW_REMAP[key]
    except KeyError:
        raise ValueError(f"unknown source label: {original!r}") from None


def _largest_remainder_counts(total: int, ratios: tuple[float, float, float]) -> list[int]:
    """Apportion `total` across three bins; deterministic, sums exactly."""
    exact = [total * r for r in ratios]
    floors = [math.floor(e) for e in exact]
    short = total - sum(floors)
    # Hand leftover units to the largest fractional remainders; ties go to
    # the earlier bin (train < validation < test).
    order = sorted(range(3), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in order[:short]:
        floors[i] += 1
    return floors


def stratified_split(
    labels: list[ClassLabel],
    ratios: tuple[float, float, float] = (0.70, 0.15, 0.15),
    seed: int = 0,
) -> DatasetSplit:
    """Split indices per class with largest-remainder rounding.

    Deterministic for a fixed seed; every class must have at least 3
    samples so each can reach all partitions at the default ratios.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios}")
    if any(r < 0 for r in ratios):
        raise ValueError("split ratios must be nonnegative")

    by_class: dict[ClassLabel, list[int]] = {}
    for idx, label in enumerate(labels):
        by_class.setdefault(label, []).append(idx)
    for label, idxs in by_class.items():
        if len(idxs) < 3:
            raise ValueError(f"class {label} has {len(idxs)} samples; at least 3 required")

    rng = np.random.default_rng(seed)
    train: list[int] = []
    validation: list[int] = []
    test: list[int] = []
    for label in sorted(by_class):
        idxs = np.array(by_class[label])
        rng.shuffle(idxs)
        n_train, n_val, n_test = _largest_remainder_counts(len(idxs), ratios)
        train.extend(idxs[:n_train].tolist())
        validation.extend(idxs[n_train : n_train + n_val].tolist())
        test.extend(idxs[n_train + n_val :].tolist())

    return DatasetSplit(
        train=tuple(train),
        validation=tuple(validation),
        test=tuple(test),
        ratios=ratios,
        seed=seed,
    )


def rebalance(
    indices: list[int],
    labels: list[ClassLabel],
    plan: BalancingPlan,
) -> list[int]:
    """Resample a training index list per the balancing plan.

    The minority class is duplicated with replacement until it reaches
    majority_count * num / denom of the oversample ratio; the majority class
    is randomly truncated to `undersample_cap` when set. Original minority
    indices are always retained; only index duplication occurs, never
    fabrication of feature values.
    """
    if len(indices) != len(labels):
        raise ValueError("indices and labels must align")
    counts = Counter(labels)
    if not counts:
        raise ValueError("cannot rebalance an empty index list")
    for label in ClassLabel:
        if label in counts and counts[label] == 0:
            raise ValueError(f"class {label} is empty")

    # Ties resolve by label order so minority/majority are deterministic.
    minority = min(counts, key=lambda c: (counts[c], int(c)))
    majority = max(counts, key=lambda c: (counts[c], -int(c)))
    if minority == majority:
        return list(indices)

    num, denom = plan.oversample_ratio
    target_minority = math.ceil(counts[majority] * num / denom)

    rng = np.random.default_rng(plan.seed)
    minority_pool = [i for i, lab in zip(indices, labels) if lab == minority]
    majority_pool = [i for i, lab in zip(indices, labels) if lab == majority]

    extra: list[int] = []
    if len(minority_pool) < target_minority:
        draws = rng.choice(minority_pool, size=target_minority - len(minority_pool), replace=True)
        extra = draws.tolist()

    if plan.undersample_cap is not None and len(majority_pool) > plan.undersample_cap:
        keep = rng.choice(len(majority_pool), size=plan.undersample_cap, replace=False)
        kept_majority = {majority_pool[i] for i in keep.tolist()}
    else:
        kept_majority = set(majority_pool)

    result = [
        i
        for i, lab in zip(indices, labels)
        if lab != majority or i in kept_majority
    ]
    result.extend(extra)
    return result
