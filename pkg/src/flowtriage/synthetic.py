"""Synthetic datasets: desk-scale stand-ins for full flow corpora.

Two generators cover the quantitative checks: a heavily imbalanced
two-Gaussian binary task for the balancing ablation, and a separable
three-class flow generator producing records in the standard schema for
end-to-end classification runs.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from flowtriage.flows.types import ClassLabel, FeatureSchema, FlowRecord

_NUMERIC_FEATURES = (
    "Flow Duration",
    "Flow Bytes/s",
    "Flow Packets/s",
    "Avg Packet Size",
    "Init Win Bytes Fwd",
    "Tot Fwd Pkts",
    "Tot Bwd Pkts",
    "TotLen Fwd Pkts",
    "TotLen Bwd Pkts",
    "SYN Flag Cnt",
    "ACK Flag Cnt",
    "Src TTL",
)

_INTERPRETATION = {
    "Flow Bytes/s": (
        "Byte rate",
        "sustained high byte rates point to volumetric flooding",
    ),
    "Flow Packets/s": (
        "Packet rate",
        "very high packet rates are typical of flood and scan activity",
    ),
    "Avg Packet Size": (
        "Mean payload size",
        "small uniform payloads are characteristic of packet floods",
    ),
    "Init Win Bytes Fwd": (
        "Initial TCP window",
        "anomalous window sizes can flag scanning tools",
    ),
    "SYN Flag Cnt": (
        "SYN flag count",
        "excess SYNs without completions indicate SYN flooding",
    ),
    "Src TTL": (
        "Source Time-to-Live",
        "irregular TTL values may indicate spoofed packets",
    ),
    "Protocol": (
        "Transport protocol",
        "UDP and ICMP are frequently abused for amplification",
    ),
}


def synthetic_schema(pad_to: int = 66) -> FeatureSchema:
    """Schema for generator output: 12 numerics, one-hot protocol, zero pad."""
    return FeatureSchema(
        schema_id="synthetic-flows-v1",
        numeric_features=_NUMERIC_FEATURES,
        categorical_features={"Protocol": ("TCP", "UDP", "ICMP")},
        pad_to=pad_to,
        interpretation=dict(_INTERPRETATION),
        metadata_columns={
            "flow_id": "Flow ID",
            "timestamp": "Timestamp",
            "src_ip": "Src IP",
            "src_port": "Src Port",
            "dst_ip": "Dst IP",
            "dst_port": "Dst Port",
            "protocol": "Protocol",
        },
        label_column="Label",
    )


# Class-conditional means over the numeric features; the classes are
# separable by construction so a desk-scale run can reach high accuracy.
_CLASS_PROFILES = {
    ClassLabel.BENIGN: dict(
        duration=2000.0, bytes_s=3.0e4, pkts_s=40.0, pkt_size=640.0, win=8192.0,
        fwd=22.0, bwd=20.0, syn=1.0, ttl=64.0, protocol="TCP",
    ),
    ClassLabel.DOS: dict(
        duration=400.0, bytes_s=4.5e6, pkts_s=9000.0, pkt_size=120.0, win=512.0,
        fwd=900.0, bwd=8.0, syn=350.0, ttl=245.0, protocol="TCP",
    ),
    ClassLabel.DDOS: dict(
        duration=150.0, bytes_s=2.2e6, pkts_s=16000.0, pkt_size=90.0, win=256.0,
        fwd=1400.0, bwd=3.0, syn=60.0, ttl=128.0, protocol="UDP",
    ),
}


def generate_flows(
    n_per_class: int,
    seed: int = 0,
    noise: float = 0.08,
) -> list[FlowRecord]:
    """Three-class flow records with class-separable numeric profiles."""
    rng = np.random.default_rng(seed)
    records: list[FlowRecord] = []
    counter = 0
    for label in ClassLabel:
        profile = _CLASS_PROFILES[label]
        for _ in range(n_per_class):
            jitter = lambda base: float(base * (1.0 + noise * rng.standard_normal()))
            fwd = max(jitter(profile["fwd"]), 1.0)
            bwd = max(jitter(profile["bwd"]), 0.0)
            pkt_size = max(jitter(profile["pkt_size"]), 8.0)
            values = {
                "Flow Duration": max(jitter(profile["duration"]), 1.0),
                "Flow Bytes/s": max(jitter(profile["bytes_s"]), 1.0),
                "Flow Packets/s": max(jitter(profile["pkts_s"]), 0.1),
                "Avg Packet Size": pkt_size,
                "Init Win Bytes Fwd": max(jitter(profile["win"]), 0.0),
                "Tot Fwd Pkts": fwd,
                "Tot Bwd Pkts": bwd,
                "TotLen Fwd Pkts": fwd * pkt_size,
                "TotLen Bwd Pkts": bwd * pkt_size,
                "SYN Flag Cnt": max(jitter(profile["syn"]), 0.0),
                "ACK Flag Cnt": max(jitter(profile["fwd"] * 0.9), 0.0),
                "Src TTL": max(jitter(profile["ttl"]), 1.0),
            }
            counter += 1
            records.append(
                FlowRecord(
                    flow_id=f"flow-{counter:05d}",
                    timestamp=f"2024-03-01T10:{counter % 60:02d}:00Z",
                    src_ip=f"10.{rng.integers(0, 255)}.{rng.integers(0, 255)}.{rng.integers(1, 255)}",
                    dst_ip=f"192.168.1.{rng.integers(1, 255)}",
                    src_port=int(rng.integers(1024, 65535)),
                    dst_port=int(rng.choice([80, 443, 53, 123])),
                    protocol=profile["protocol"],
                    raw_features=[(name, values[name]) for name in _NUMERIC_FEATURES]
                    + [("Protocol", profile["protocol"])],
                    label=label,
                )
            )
    return records


def flows_to_csv(records: list[FlowRecord], schema: FeatureSchema, path: str | Path) -> None:
    """Write records as a CSV matching the schema's column bindings."""
    meta = schema.metadata_columns
    header = (
        [meta["flow_id"], meta["timestamp"], meta["src_ip"], meta["src_port"],
         meta["dst_ip"], meta["dst_port"]]
        + list(schema.numeric_features)
        + list(schema.categorical_features)
        + ([schema.label_column] if schema.label_column else [])
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in records:
            values = rec.feature_map()
            row = [rec.flow_id, rec.timestamp, rec.src_ip, rec.src_port, rec.dst_ip, rec.dst_port]
            row.extend(values.get(name, "") for name in schema.numeric_features)
            row.extend(values.get(name, "") for name in schema.categorical_features)
            if schema.label_column:
                row.append(str(rec.label) if rec.label is not None else "")
            writer.writerow(row)


def two_gaussian_imbalanced(
    n_majority: int = 15600,
    n_minority: int = 100,
    dims: int = 2,
    separation: float = 2.0,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Overlapping two-Gaussian binary task with severe class imbalance.

    Majority samples (label 0) sit at the origin; minority samples (label 1)
    at `separation` along every axis. The default 15600:100 split reproduces
    a 156:1 imbalance where an unweighted learner collapses to the majority.
    """
    rng = np.random.default_rng(seed)
    X_major = rng.standard_normal((n_majority, dims))
    X_minor = rng.standard_normal((n_minority, dims)) + separation / np.sqrt(dims)
    X = np.vstack([X_major, X_minor])
    y = np.concatenate([np.zeros(n_majority), np.ones(n_minority)])
    perm = rng.permutation(X.shape[0])
    return X[perm], y[perm]
