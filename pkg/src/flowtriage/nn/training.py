"""Minibatch training loop with early stopping and best-epoch selection."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from flowtriage.flows.types import ClassLabel
from flowtriage.nn.adam import Adam
from flowtriage.nn.loss import ClassWeights, loss_and_dlogits, weighted_bce_loss
from flowtriage.nn.mlp import MLPConfig, MLPModel


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"training diverged (non-finite loss) at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 512
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 5
    max_epochs: int = 100
    selection_metric: str = "macro_f1"  # or "accuracy"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.selection_metric not in ("macro_f1", "accuracy"):
            raise ValueError(f"unknown selection metric {self.selection_metric!r}")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_metric: list[float] = field(default_factory=list)
    selected_epoch: int = 0

    @property
    def epochs_trained(self) -> int:
        return len(self.train_loss)


def binary_macro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Mean of positive-class and negative-class F1 scores."""
    f1s = []
    for positive in (1, 0):
        tp = int(np.sum((y_pred == positive) & (y_true == positive)))
        fp = int(np.sum((y_pred == positive) & (y_true != positive)))
        fn = int(np.sum((y_pred != positive) & (y_true == positive)))
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(f1s))


def train_binary_classifier(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    model_config: MLPConfig,
    train_config: TrainConfig = TrainConfig(),
    weights: ClassWeights = ClassWeights(1.0, 1.0),
    target_class: ClassLabel = ClassLabel.DOS,
    on_epoch: Callable[[dict], None] | None = None,
) -> tuple[MLPModel, TrainHistory]:
    """Train one one-vs-rest head with Adam and validation early stopping.

    Labels are binary (1 = target class). Training stops once the
    validation metric has not improved for `patience` epochs and the
    best-epoch weights are restored before returning.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    X_val = np.asarray(X_val, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.float64)
    if X_train.shape[0] == 0 or X_val.shape[0] == 0:
        raise ValueError("train and validation sets must be non-empty")

    model = MLPModel(model_config, target_class, seed=train_config.seed)
    optimizer = Adam(
        model.parameters(),
        learning_rate=train_config.learning_rate,
        beta1=train_config.beta1,
        beta2=train_config.beta2,
        eps=train_config.eps,
    )
    rng = np.random.default_rng(train_config.seed + 1)
    history = TrainHistory()
    best_metric = -np.inf
    best_epoch = 0
    best_snapshot = model.snapshot()
    n = X_train.shape[0]

    for epoch in range(1, train_config.max_epochs + 1):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, train_config.batch_size):
            batch = perm[start : start + train_config.batch_size]
            try:
                probs, cache = model.forward_full(X_train[batch], train=True, rng=rng)
            except FloatingPointError:
                raise TrainingDivergedError(epoch) from None
            loss, dlogits = loss_and_dlogits(probs, y_train[batch], weights)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            grads = model.backward(cache, dlogits)
            optimizer.step(grads["params"])
            epoch_loss += loss * len(batch)
        epoch_loss /= n

        val_probs = model.forward(X_val)
        val_loss = weighted_bce_loss(y_val, val_probs[:, 1], weights)
        val_pred = (val_probs[:, 1] >= 0.5).astype(np.int64)
        if train_config.selection_metric == "accuracy":
            metric = float(np.mean(val_pred == y_val))
        else:
            metric = binary_macro_f1(y_val.astype(np.int64), val_pred)

        history.train_loss.append(epoch_loss)
        history.val_loss.append(float(val_loss))
        history.val_metric.append(metric)
        if on_epoch is not None:
            on_epoch(
                {
                    "epoch": epoch,
                    "train_loss": epoch_loss,
                    "val_loss": float(val_loss),
                    "val_metric": metric,
                    "metric_name": train_config.selection_metric,
                }
            )

        if metric > best_metric:
            best_metric = metric
            best_epoch = epoch
            best_snapshot = model.snapshot()
        elif epoch - best_epoch >= train_config.patience:
            break

    model.restore(best_snapshot)
    history.selected_epoch = best_epoch
    model.metadata.update(
        {
            "target_class": str(target_class),
            "selected_epoch": best_epoch,
            "epochs_trained": history.epochs_trained,
            "best_val_metric": best_metric,
            "selection_metric": train_config.selection_metric,
            "class_weights": {"w0": weights.w0, "w1": weights.w1},
            "seed": train_config.seed,
        }
    )
    return model, history
