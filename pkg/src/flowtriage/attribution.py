"""Gradient-based feature attribution and evidence rendering.

Importance of input dimension j is the absolute gradient of the winning
head's positive-class probability with respect to x_j. Importances live in
normalized model space; evidence strings render the raw values analysts
actually see.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from flowtriage.flows.types import ClassLabel, FeatureSchema
from flowtriage.nn.ensemble import EnsemblePrediction
from flowtriage.nn.mlp import MLPModel

FALLBACK_IMPLICATION = "no documented security implication"


@dataclass(frozen=True)
class FeatureImportance:
    values: np.ndarray  # one nonnegative importance per input dimension
    predicted_class: ClassLabel

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", arr)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("importances must be nonnegative and finite")


@dataclass(frozen=True)
class EvidenceItem:
    feature_name: str
    raw_value: float | str | None
    importance: float
    description: str
    security_implication: str
    rendered: str

    def to_dict(self) -> dict:
        return {
            "feature": self.feature_name,
            "value": self.raw_value,
            "importance": self.importance,
            "description": self.description,
            "security_implication": self.security_implication,
            "rendered": self.rendered,
        }


def gradient_importance(
    models: Mapping[ClassLabel, MLPModel],
    x: np.ndarray,
    prediction: EnsemblePrediction,
) -> FeatureImportance:
    """Absolute input gradient of the predicted class's probability."""
    model = models.get(prediction.label)
    if model is None:
        raise ValueError(f"no model available for predicted class {prediction.label}")
    grad, _ = model.input_gradient(np.atleast_2d(x))
    return FeatureImportance(values=np.abs(grad[0]), predicted_class=prediction.label)


def select_top_k(importances: FeatureImportance, k: int = 5) -> list[int]:
    """Indices of the k largest importances, ties broken by ascending index."""
    n = importances.values.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    order = np.argsort(-importances.values, kind="stable")
    return order[:k].tolist()


def _format_value(value: float | str | None) -> str:
    if value is None:
        return "missing"
    if isinstance(value, str):
        return value
    if float(value) == int(value) and abs(float(value)) < 1e15:
        return str(int(value))
    return f"{float(value):.6g}"


def interpret_features(
    features: list[tuple[str, float | str | None, float]],
    schema: FeatureSchema,
) -> list[EvidenceItem]:
    """Render (name, raw value, importance) triples as evidence strings.

    Features absent from the interpretation dictionary fall back to the
    feature name and a generic implication instead of failing.
    """
    items: list[EvidenceItem] = []
    for name, value, importance in features:
        entry = schema.interpretation_for(name)
        if entry is not None:
            description, implication = entry
        else:
            description, implication = name, FALLBACK_IMPLICATION
        rendered = f"{description} of {_format_value(value)} - {implication}"
        items.append(
            EvidenceItem(
                feature_name=name,
                raw_value=value,
                importance=float(importance),
                description=description,
                security_implication=implication,
                rendered=rendered,
            )
        )
    return items


def evidence_for_flow(
    models: Mapping[ClassLabel, MLPModel],
    x_normalized: np.ndarray,
    raw_values: Mapping[str, float | str | None],
    schema: FeatureSchema,
    prediction: EnsemblePrediction,
    k: int = 5,
    feature_override: list[str] | None = None,
) -> tuple[FeatureImportance, list[EvidenceItem]]:
    """Full attribution path for one flow: gradients, top-K, evidence.

    `feature_override` short-circuits the gradient ranking with a fixed,
    domain-chosen feature list (importances still reported for reference).
    """
    importance = gradient_importance(models, x_normalized, prediction)
    names = schema.feature_names

    if feature_override:
        chosen = []
        for feat in feature_override[:k]:
            try:
                chosen.append(names.index(feat))
            except ValueError:
                raise ValueError(f"override feature {feat!r} not in schema") from None
    else:
        chosen = select_top_k(importance, k)

    triples = []
    for idx in chosen:
        name = names[idx]
        base = name.split("=", 1)[0]
        triples.append((name, raw_values.get(base, raw_values.get(name)), importance.values[idx]))
    return importance, interpret_features(triples, schema)
