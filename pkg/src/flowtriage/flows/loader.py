"""Load flow records from delimited text and schemas from JSON files."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from flowtriage.flows.types import ClassLabel, FeatureSchema, FlowRecord, SchemaError

logger = logging.getLogger(__name__)

# Metadata fields a schema may bind to CSV columns.
_METADATA_KEYS = ("flow_id", "timestamp", "src_ip", "dst_ip", "src_port", "dst_port", "protocol")


@dataclass
class RowError:
    """A non-fatal problem with one data row."""

    row_number: int
    message: str


@dataclass
class LoadResult:
    """Outcome of parsing a flow CSV: records plus collected row errors."""

    records: list[FlowRecord]
    errors: list[RowError] = field(default_factory=list)
    ignored_columns: tuple[str, ...] = ()

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def load_schema(source: str | Path | IO[str]) -> FeatureSchema:
    """Read a feature schema description from a JSON document."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.load(source)
    try:
        interpretation = {
            name: (entry["description"], entry["security_implication"])
            for name, entry in doc.get("interpretation", {}).items()
        }
        return FeatureSchema(
            schema_id=doc["schema_id"],
            numeric_features=tuple(doc["numeric_features"]),
            categorical_features={
                name: tuple(cats) for name, cats in doc.get("categorical_features", {}).items()
            },
            pad_to=int(doc.get("pad_to", 66)),
            interpretation=interpretation,
            metadata_columns=dict(doc.get("metadata_columns", {})),
            label_column=doc.get("label_column"),
            label_map=dict(doc.get("label_map", {})),
        )
    except KeyError as exc:
        raise SchemaError(f"schema document missing required key: {exc}") from None


def save_schema(schema: FeatureSchema, path: str | Path) -> None:
    doc = {
        "schema_id": schema.schema_id,
        "numeric_features": list(schema.numeric_features),
        "categorical_features": {k: list(v) for k, v in schema.categorical_features.items()},
        "pad_to": schema.pad_to,
        "interpretation": {
            name: {"description": d, "security_implication": s}
            for name, (d, s) in schema.interpretation.items()
        },
        "metadata_columns": schema.metadata_columns,
        "label_column": schema.label_column,
        "label_map": schema.label_map,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _parse_label(raw: str, schema: FeatureSchema) -> ClassLabel | None:
    raw = raw.strip()
    if not raw:
        return None
    mapped = schema.label_map.get(raw, raw)
    return ClassLabel.from_string(mapped)


def _parse_numeric(raw: str) -> float | None:
    raw = raw.strip()
    if raw == "" or raw.lower() in ("na", "nan", "inf", "-inf", "infinity", "-infinity"):
        return None
    value = float(raw)
    if value != value or value in (float("inf"), float("-inf")):
        return None
    return value


def load_flows(source: bytes | str | IO[str] | Path, schema: FeatureSchema) -> LoadResult:
    """Parse a header-bearing CSV stream into flow records.

    Unknown columns are ignored (with a warning); malformed rows are
    collected as row-level errors rather than aborting the load. Missing
    numeric cells become None and are imputed downstream.
    """
    if isinstance(source, bytes):
        stream: IO[str] = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str) and "\n" in source:
        stream = io.StringIO(source)
    elif isinstance(source, (str, Path)):
        stream = open(source, "r", encoding="utf-8", newline="")
    else:
        stream = source

    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return LoadResult(records=[])
    header = [h.strip() for h in header]

    feature_cols = set(schema.numeric_features) | set(schema.categorical_features)
    meta_by_col = {col: key for key, col in schema.metadata_columns.items()}
    known = feature_cols | set(meta_by_col) | ({schema.label_column} if schema.label_column else set())
    ignored = tuple(h for h in header if h not in known)
    if ignored:
        logger.warning("ignoring %d unknown columns: %s", len(ignored), ", ".join(ignored[:8]))

    col_index = {name: i for i, name in enumerate(header)}
    records: list[FlowRecord] = []
    errors: list[RowError] = []

    for row_number, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            errors.append(
                RowError(row_number, f"expected {len(header)} columns, found {len(row)}")
            )
            continue
        try:
            records.append(_row_to_record(row, col_index, schema, meta_by_col, row_number))
        except (ValueError, SchemaError) as exc:
            errors.append(RowError(row_number, str(exc)))

    if isinstance(source, (str, Path)) and not isinstance(stream, io.StringIO):
        stream.close()
    return LoadResult(records=records, errors=errors, ignored_columns=ignored)


def _row_to_record(
    row: list[str],
    col_index: dict[str, int],
    schema: FeatureSchema,
    meta_by_col: dict[str, str],
    row_number: int,
) -> FlowRecord:
    def cell(column: str) -> str:
        idx = col_index.get(column)
        return row[idx].strip() if idx is not None else ""

    features: list[tuple[str, float | str | None]] = []
    for name in schema.numeric_features:
        if name in col_index:
            features.append((name, _parse_numeric(cell(name))))
    for name in schema.categorical_features:
        if name in col_index:
            features.append((name, cell(name)))

    meta: dict[str, str] = {}
    for col, key in meta_by_col.items():
        meta[key] = cell(col)

    label = None
    if schema.label_column and schema.label_column in col_index:
        label = _parse_label(cell(schema.label_column), schema)

    def port(key: str) -> int:
        raw = meta.get(key, "")
        if not raw:
            return 0
        value = int(float(raw))
        if not 0 <= value <= 65535:
            raise ValueError(f"{key} {value} out of range 0-65535")
        return value

    return FlowRecord(
        flow_id=meta.get("flow_id") or f"row-{row_number}",
        timestamp=meta.get("timestamp", ""),
        src_ip=meta.get("src_ip", ""),
        dst_ip=meta.get("dst_ip", ""),
        src_port=port("src_port"),
        dst_port=port("dst_port"),
        protocol=meta.get("protocol", ""),
        raw_features=features,
        label=label,
    )


def iter_labels(records: Iterable[FlowRecord]) -> list[ClassLabel]:
    labels = []
    for rec in records:
        if rec.label is None:
            raise ValueError(f"flow {rec.flow_id!r} has no label")
        labels.append(rec.label)
    return labels
