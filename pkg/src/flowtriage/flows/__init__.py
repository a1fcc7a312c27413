from flowtriage.flows.types import (
    BalancingPlan,
    ClassLabel,
    DatasetSplit,
    FeatureSchema,
    FeatureVector,
    FlowRecord,
    NormalizationStats,
)
from flowtriage.flows.loader import LoadResult, load_flows, load_schema
from flowtriage.flows.encode import (
    EncodedDataset,
    encode_dataset,
    encode_features,
    fit_apply_normalizer,
)
from flowtriage.flows.splits import remap_unsw_label, rebalance, stratified_split

__all__ = [
    "BalancingPlan",
    "ClassLabel",
    "DatasetSplit",
    "EncodedDataset",
    "FeatureSchema",
    "FeatureVector",
    "FlowRecord",
    "LoadResult",
    "NormalizationStats",
    "encode_dataset",
    "encode_features",
    "fit_apply_normalizer",
    "load_flows",
    "load_schema",
    "rebalance",
    "remap_unsw_label",
    "stratified_split",
]
