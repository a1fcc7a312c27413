"""Encode flow records into the fixed-width feature space and normalize."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from flowtriage.flows.types import (
    ClassLabel,
    FeatureSchema,
    FeatureVector,
    FlowRecord,
    NormalizationStats,
)

logger = logging.getLogger(__name__)


@dataclass
class EncodeStats:
    """Counters for soft encoding anomalies (unseen categories, imputations)."""

    unseen_categories: int = 0
    imputed_cells: int = 0
    by_feature: dict[str, int] = field(default_factory=dict)

    def note_unseen(self, feature: str) -> None:
        self.unseen_categories += 1
        self.by_feature[feature] = self.by_feature.get(feature, 0) + 1


def encode_features(
    record: FlowRecord,
    schema: FeatureSchema,
    *,
    missing_fill: np.ndarray | None = None,
    stats: EncodeStats | None = None,
) -> FeatureVector:
    """Encode one record: numerics in schema order, one-hot blocks, zero pad.

    Missing numeric cells take `missing_fill` (per-numeric-feature values,
    typically the train means) or 0.0. An unseen categorical value encodes
    as an all-zeros block and bumps the warning counter instead of failing.
    """
    values = np.zeros(schema.pad_to, dtype=np.float64)
    present = record.feature_map()

    for j, name in enumerate(schema.numeric_features):
        raw = present.get(name)
        if raw is None:
            fill = float(missing_fill[j]) if missing_fill is not None else 0.0
            values[j] = fill
            if stats is not None:
                stats.imputed_cells += 1
            continue
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError(
                f"non-finite value {value!r} for feature {name!r} in flow {record.flow_id!r}"
            )
        values[j] = value

    offset = schema.numeric_width
    for name, categories in schema.categorical_features.items():
        raw = present.get(name)
        if raw is not None:
            raw_str = str(raw)
            try:
                values[offset + categories.index(raw_str)] = 1.0
            except ValueError:
                if stats is not None:
                    stats.note_unseen(name)
                logger.debug("unseen category %r for feature %r", raw_str, name)
        offset += len(categories)

    return FeatureVector(values=values, schema_id=schema.schema_id)


def fit_apply_normalizer(
    train: list[FeatureVector] | np.ndarray,
    apply_to: list[FeatureVector] | np.ndarray | None = None,
    *,
    numeric_width: int | None = None,
    fitted_on: str = "train",
) -> tuple[NormalizationStats, np.ndarray, np.ndarray | None]:
    """Fit per-feature z-score statistics on the train set, then apply.

    Uses population standard deviation. Constant features (sigma = 0) map
    to 0 rather than NaN. Only the leading `numeric_width` positions are
    scaled; one-hot and padding positions pass through unchanged.

    Returns the stats, the normalized train matrix, and the normalized
    `apply_to` matrix (None when `apply_to` was not given).
    """
    train_matrix = _as_matrix(train)
    if train_matrix.shape[0] == 0:
        raise ValueError("cannot fit normalizer on an empty train set")
    width = train_matrix.shape[1] if numeric_width is None else numeric_width

    numeric = train_matrix[:, :width]
    mean = numeric.mean(axis=0)
    std = numeric.std(axis=0)  # population sigma
    stats = NormalizationStats(mean=mean, stddev=std, fitted_on=fitted_on)

    train_norm = apply_normalizer(train_matrix, stats)
    apply_norm = None if apply_to is None else apply_normalizer(_as_matrix(apply_to), stats)
    return stats, train_norm, apply_norm


def apply_normalizer(matrix: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    width = stats.mean.shape[0]
    out = np.array(matrix, dtype=np.float64, copy=True)
    safe = np.where(stats.stddev == 0.0, 1.0, stats.stddev)
    scaled = (out[:, :width] - stats.mean) / safe
    scaled[:, stats.stddev == 0.0] = 0.0
    out[:, :width] = scaled
    return out


def _as_matrix(data: list[FeatureVector] | np.ndarray) -> np.ndarray:
    if isinstance(data, np.ndarray):
        return np.atleast_2d(np.asarray(data, dtype=np.float64))
    return np.stack([fv.values for fv in data]) if data else np.zeros((0, 0))


@dataclass
class EncodedDataset:
    """A fully encoded dataset with labels, ids and provenance."""

    X: np.ndarray
    labels: np.ndarray  # ClassLabel integer values, -1 when unlabeled
    flow_ids: tuple[str, ...]
    schema_id: str
    numeric_width: int
    encode_stats: EncodeStats = field(default_factory=EncodeStats)

    def __len__(self) -> int:
        return self.X.shape[0]

    def class_labels(self) -> list[ClassLabel | None]:
        return [ClassLabel(v) if v >= 0 else None for v in self.labels]


def encode_dataset(
    records: list[FlowRecord],
    schema: FeatureSchema,
    *,
    impute_with_means: bool = True,
) -> EncodedDataset:
    """Encode a record batch, imputing missing numerics with feature means.

    Means are computed from the observed (non-missing) cells in this batch,
    so the z-score of an imputed cell ends up at 0 when the normalizer is
    fitted on the same batch.
    """
    stats = EncodeStats()
    fill = None
    if impute_with_means and records:
        fill = _observed_means(records, schema)

    encoded = [
        encode_features(rec, schema, missing_fill=fill, stats=stats) for rec in records
    ]
    X = (
        np.stack([fv.values for fv in encoded])
        if encoded
        else np.zeros((0, schema.pad_to))
    )
    labels = np.array(
        [int(rec.label) if rec.label is not None else -1 for rec in records], dtype=np.int64
    )
    return EncodedDataset(
        X=X,
        labels=labels,
        flow_ids=tuple(rec.flow_id for rec in records),
        schema_id=schema.schema_id,
        numeric_width=schema.numeric_width,
        encode_stats=stats,
    )


def _observed_means(records: list[FlowRecord], schema: FeatureSchema) -> np.ndarray:
    sums = np.zeros(schema.numeric_width)
    counts = np.zeros(schema.numeric_width)
    for rec in records:
        present = rec.feature_map()
        for j, name in enumerate(schema.numeric_features):
            raw = present.get(name)
            if raw is not None and math.isfinite(float(raw)):
                sums[j] += float(raw)
                counts[j] += 1
    return np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)


def save_encoded(dataset: EncodedDataset, stats: NormalizationStats, out_dir: str | Path) -> None:
    """Persist an encoded dataset as npz plus a JSON stats sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savez(
        out / "dataset.npz",
        X=dataset.X,
        labels=dataset.labels,
        flow_ids=np.array(dataset.flow_ids, dtype=object),
        meta=np.array(
            json.dumps({"schema_id": dataset.schema_id, "numeric_width": dataset.numeric_width})
        ),
    )
    sidecar = {"schema_id": dataset.schema_id, **stats.to_dict()}
    (out / "stats.json").write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")


def load_encoded(out_dir: str | Path) -> tuple[EncodedDataset, NormalizationStats]:
    out = Path(out_dir)
    with np.load(out / "dataset.npz", allow_pickle=True) as data:
        meta = json.loads(str(data["meta"]))
        dataset = EncodedDataset(
            X=data["X"],
            labels=data["labels"],
            flow_ids=tuple(data["flow_ids"].tolist()),
            schema_id=meta["schema_id"],
            numeric_width=meta["numeric_width"],
        )
    sidecar = json.loads((out / "stats.json").read_text(encoding="utf-8"))
    return dataset, NormalizationStats.from_dict(sidecar)
