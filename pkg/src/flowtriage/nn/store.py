"""Versioned model persistence; eval outputs are bitwise stable on reload."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from flowtriage.flows.types import ClassLabel
from flowtriage.nn.mlp import MLPConfig, MLPModel

MODEL_FORMAT_VERSION = "mlp/1"


class ModelFormatError(ValueError):
    pass


def save_model(model: MLPModel, path: str | Path) -> None:
    """Write one head as an npz container: weights, batch-norm state, metadata."""
    arrays: dict[str, np.ndarray] = {}
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"W{i}"] = w
        arrays[f"b{i}"] = b
    if model.config.use_batchnorm:
        for i in range(len(model.bn_gamma)):
            arrays[f"bn{i}_gamma"] = model.bn_gamma[i]
            arrays[f"bn{i}_beta"] = model.bn_beta[i]
            arrays[f"bn{i}_mean"] = model.bn_running_mean[i]
            arrays[f"bn{i}_var"] = model.bn_running_var[i]
    meta = {
        "format": MODEL_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "target_class": str(model.target_class),
        "metadata": model.metadata,
    }
    arrays["meta"] = np.array(json.dumps(meta))
    np.savez(path, **arrays)


def load_model(path: str | Path) -> MLPModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != MODEL_FORMAT_VERSION:
            raise ModelFormatError(
                f"unsupported model format {meta.get('format')!r}; "
                f"expected {MODEL_FORMAT_VERSION!r}"
            )
        config = MLPConfig.from_dict(meta["config"])
        model = MLPModel(
            config,
            ClassLabel.from_string(meta["target_class"]),
            metadata=meta.get("metadata", {}),
        )
        for i in range(len(model.weights)):
            model.weights[i] = data[f"W{i}"].astype(np.float64)
            model.biases[i] = data[f"b{i}"].astype(np.float64)
        if config.use_batchnorm:
            for i in range(len(config.layer_widths)):
                model.bn_gamma[i] = data[f"bn{i}_gamma"].astype(np.float64)
                model.bn_beta[i] = data[f"bn{i}_beta"].astype(np.float64)
                model.bn_running_mean[i] = data[f"bn{i}_mean"].astype(np.float64)
                model.bn_running_var[i] = data[f"bn{i}_var"].astype(np.float64)
    return model
