"""Core flow-domain types: labels, records, schemas, vectors, splits."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ClassLabel(enum.IntEnum):
    """Traffic classes, ordered for vector indexing and tie-breaking."""

    BENIGN = 0
    DOS = 1
    DDOS = 2

    def __str__(self) -> str:
        return _LABEL_NAMES[self]

    @classmethod
    def from_string(cls, name: str) -> "ClassLabel":
        try:
            return _LABEL_PARSE[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown class label: {name!r}") from None


_LABEL_NAMES = {ClassLabel.BENIGN: "Benign", ClassLabel.DOS: "DoS", ClassLabel.DDOS: "DDoS"}
_LABEL_PARSE = {"benign": ClassLabel.BENIGN, "dos": ClassLabel.DOS, "ddos": ClassLabel.DDOS}


class SchemaError(ValueError):
    """Raised when a feature schema is internally inconsistent."""


@dataclass(frozen=True)
class FeatureSchema:
    """Declares how raw flow columns map into the fixed-width feature space.

    The encoded layout is: numeric features in declaration order, then one
    one-hot block per categorical feature, then zero padding up to `pad_to`.
    """

    schema_id: str
    numeric_features: tuple[str, ...]
    categorical_features: dict[str, tuple[str, ...]]
    pad_to: int = 66
    interpretation: dict[str, tuple[str, str]] = field(default_factory=dict)
    metadata_columns: dict[str, str] = field(default_factory=dict)
    label_column: str | None = None
    label_map: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for name in list(self.numeric_features) + list(self.categorical_features):
            if name in seen:
                raise SchemaError(f"duplicate feature name: {name!r}")
            seen.add(name)
        if self.resolved_width > self.pad_to:
            raise SchemaError(
                f"encoded width {self.resolved_width} exceeds pad_to={self.pad_to}"
            )
        for key in self.interpretation:
            if key not in seen:
                raise SchemaError(f"interpretation entry for unknown feature: {key!r}")

    @property
    def numeric_width(self) -> int:
        return len(self.numeric_features)

    @property
    def resolved_width(self) -> int:
        """Width before zero padding: numerics plus all one-hot blocks."""
        return self.numeric_width + sum(len(c) for c in self.categorical_features.values())

    @property
    def feature_names(self) -> tuple[str, ...]:
        """Name of every encoded position (padding positions included)."""
        names = list(self.numeric_features)
        for feat, cats in self.categorical_features.items():
            names.extend(f"{feat}={cat}" for cat in cats)
        names.extend(f"pad_{i}" for i in range(self.pad_to - len(names)))
        return tuple(names)

    def interpretation_for(self, feature: str) -> tuple[str, str] | None:
        base = feature.split("=", 1)[0]
        return self.interpretation.get(feature) or self.interpretation.get(base)


@dataclass
class FlowRecord:
    """One network flow: metadata plus ordered raw feature values.

    Missing numeric cells are stored as None and imputed at encode time.
    """

    flow_id: str
    timestamp: str = ""
    src_ip: str = ""
    dst_ip: str = ""
    src_port: int = 0
    dst_port: int = 0
    protocol: str | int = ""
    raw_features: list[tuple[str, float | str | None]] = field(default_factory=list)
    label: ClassLabel | None = None

    def __post_init__(self) -> None:
        for port, side in ((self.src_port, "src"), (self.dst_port, "dst")):
            if not 0 <= port <= 65535:
                raise ValueError(f"{side}_port {port} out of range 0-65535")
        names = [n for n, _ in self.raw_features]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate raw feature names in flow {self.flow_id!r}")

    def feature_map(self) -> dict[str, float | str | None]:
        return dict(self.raw_features)


@dataclass(frozen=True)
class FeatureVector:
    """A fixed-width encoded flow. All entries must be finite."""

    values: np.ndarray
    schema_id: str

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", arr)
        if arr.ndim != 1:
            raise ValueError("feature vector must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature vector contains non-finite values")


@dataclass(frozen=True)
class NormalizationStats:
    """Per-numeric-feature mean and population standard deviation."""

    mean: np.ndarray
    stddev: np.ndarray
    fitted_on: str = "train"

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.stddev, dtype=np.float64)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "stddev", std)
        if mean.shape != std.shape:
            raise ValueError("mean and stddev lengths differ")
        if np.any(std < 0):
            raise ValueError("stddev must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "stddev": self.stddev.tolist(),
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationStats":
        return cls(
            mean=np.array(data["mean"], dtype=np.float64),
            stddev=np.array(data["stddev"], dtype=np.float64),
            fitted_on=data.get("fitted_on", "train"),
        )


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/validation/test index lists covering a dataset."""

    train: tuple[int, ...]
    validation: tuple[int, ...]
    test: tuple[int, ...]
    ratios: tuple[float, float, float]
    seed: int

    def validate(self, n_total: int) -> None:
        parts = [set(self.train), set(self.validation), set(self.test)]
        union = parts[0] | parts[1] | parts[2]
        if len(union) != len(self.train) + len(self.validation) + len(self.test):
            raise ValueError("split partitions overlap")
        if union != set(range(n_total)):
            raise ValueError("split partitions do not cover the dataset")


@dataclass(frozen=True)
class BalancingPlan:
    """Resampling knobs: minority:majority oversample target and majority cap."""

    oversample_ratio: tuple[int, int] = (1, 5)
    undersample_cap: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        num, denom = self.oversample_ratio
        if num <= 0 or denom <= 0:
            raise ValueError("oversample ratio terms must be positive")
        if self.undersample_cap is not None and self.undersample_cap <= 0:
            raise ValueError("undersample_cap must be positive")


def require_finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise ValueError(f"non-finite value for {what}: {value!r}")
    return value
