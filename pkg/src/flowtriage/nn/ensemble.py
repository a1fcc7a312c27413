"""Fuse the three one-vs-rest heads into a tiered prediction."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from flowtriage.flows.types import ClassLabel
from flowtriage.nn.mlp import MLPModel


class ConfidenceTier(enum.Enum):
    """SOC triage bands over the maximum class probability."""

    VERY_HIGH = "Very High"
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"

    def __str__(self) -> str:
        return self.value


def assign_tier(confidence: float) -> ConfidenceTier:
    """Map a confidence score onto its triage tier.

    Bands: >= 0.95 Very High, [0.70, 0.95) High, [0.50, 0.70) Medium,
    below 0.50 Low.
    """
    if not 0.0 <= confidence <= 1.0:
        raise ValueError(f"confidence {confidence!r} outside [0, 1]")
    if confidence >= 0.95:
        return ConfidenceTier.VERY_HIGH
    if confidence >= 0.70:
        return ConfidenceTier.HIGH
    if confidence >= 0.50:
        return ConfidenceTier.MEDIUM
    return ConfidenceTier.LOW


@dataclass(frozen=True)
class EnsemblePrediction:
    label: ClassLabel
    confidence: float
    tier: ConfidenceTier
    per_class_probs: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {
            "class": str(self.label),
            "confidence": self.confidence,
            "tier": str(self.tier),
            "per_class_probs": list(self.per_class_probs),
        }


def ensemble_predict(
    x: np.ndarray,
    models: Mapping[ClassLabel, MLPModel],
) -> EnsemblePrediction:
    """Run all three heads on one flow and pick the argmax class.

    Each head contributes its positive-class softmax output; ties break by
    the fixed label order Benign < DoS < DDoS.
    """
    missing = [label for label in ClassLabel if label not in models]
    if missing:
        raise ValueError(f"missing models for classes: {[str(m) for m in missing]}")
    extra = [label for label in models if label not in set(ClassLabel)]
    if extra:
        raise ValueError(f"unexpected model keys: {extra}")

    probs = tuple(
        float(models[label].forward(np.atleast_2d(x))[0, 1]) for label in ClassLabel
    )
    winner = ClassLabel(int(np.argmax(probs)))  # first max wins ties
    confidence = probs[int(winner)]
    return EnsemblePrediction(
        label=winner,
        confidence=confidence,
        tier=assign_tier(confidence),
        per_class_probs=probs,
    )
