"""Class-weighted binary cross-entropy and its gradient."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Probabilities are clamped away from {0, 1} before logs; the loss is
# unbounded at the endpoints.
PROB_EPS = 1e-7


@dataclass(frozen=True)
class ClassWeights:
    """Inverse-frequency weights w_c = N / (2 * N_c) for a binary task."""

    w0: float
    w1: float

    def __post_init__(self) -> None:
        for name, w in (("w0", self.w0), ("w1", self.w1)):
            if not (math.isfinite(w) and w > 0):
                raise ValueError(f"{name} must be finite and positive, got {w!r}")

    @classmethod
    def balanced(cls) -> "ClassWeights":
        return cls(1.0, 1.0)

    @classmethod
    def from_counts(cls, n_negative: int, n_positive: int) -> "ClassWeights":
        if n_negative <= 0 or n_positive <= 0:
            raise ValueError("class counts must be positive to compute weights")
        total = n_negative + n_positive
        return cls(w0=total / (2.0 * n_negative), w1=total / (2.0 * n_positive))


def class_weights(counts: tuple[int, int]) -> ClassWeights:
    """Compute weights from (negative, positive) sample counts."""
    return ClassWeights.from_counts(*counts)


def weighted_bce_loss(
    y: np.ndarray | float,
    y_hat: np.ndarray | float,
    weights: ClassWeights = ClassWeights(1.0, 1.0),
) -> float:
    """Minibatch mean of -[w1*y*log(p) + w0*(1-y)*log(1-p)], p clamped."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=np.float64))
    p = np.clip(np.atleast_1d(np.asarray(y_hat, dtype=np.float64)), PROB_EPS, 1 - PROB_EPS)
    per_sample = -(weights.w1 * y_arr * np.log(p) + weights.w0 * (1 - y_arr) * np.log1p(-p))
    return float(per_sample.mean())


def weighted_bce_grad(
    y: np.ndarray,
    y_hat: np.ndarray,
    weights: ClassWeights,
) -> np.ndarray:
    """d(mean loss)/d(y_hat); zero where the clamp is active."""
    y_arr = np.asarray(y, dtype=np.float64)
    raw = np.asarray(y_hat, dtype=np.float64)
    p = np.clip(raw, PROB_EPS, 1 - PROB_EPS)
    grad = (-(weights.w1 * y_arr / p) + weights.w0 * (1 - y_arr) / (1 - p)) / y_arr.shape[0]
    inside = (raw > PROB_EPS) & (raw < 1 - PROB_EPS)
    return np.where(inside, grad, 0.0)


def loss_and_dlogits(
    probs: np.ndarray,
    y: np.ndarray,
    weights: ClassWeights,
) -> tuple[float, np.ndarray]:
    """Loss plus its gradient w.r.t. the two output logits.

    The positive-class probability is the second softmax output; the
    softmax Jacobian reduces to +-p0*p1 for a two-way head.
    """
    y_hat = probs[:, 1]
    loss = weighted_bce_loss(y, y_hat, weights)
    dyhat = weighted_bce_grad(y, y_hat, weights)
    p0p1 = probs[:, 0] * probs[:, 1]
    dlogits = np.empty_like(probs)
    dlogits[:, 1] = dyhat * p0p1
    dlogits[:, 0] = -dlogits[:, 1]
    return loss, dlogits
