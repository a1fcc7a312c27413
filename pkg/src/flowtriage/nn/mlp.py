"""Binary MLP with ReLU hidden layers, optional batch norm, and dropout.

The forward pass for a k-layer network is

    h0 = x
    hl = relu(batchnorm(W_l @ h_{l-1} + b_l))      for hidden layers
    y  = softmax(W_k @ h_{k-1} + b_k)

with inverted dropout applied after each hidden activation in train mode.
All math is plain numpy; backward passes are hand-derived and checked
against central finite differences in the test suite.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from flowtriage.flows.types import ClassLabel

_BN_EPS = 1e-5
_BN_MOMENTUM = 0.9


@dataclass(frozen=True)
class MLPConfig:
    """Architecture description for one binary one-vs-rest head."""

    layer_widths: tuple[int, ...]
    dropout: tuple[float, ...]
    use_batchnorm: bool = False
    input_dim: int = 66
    output_dim: int = 2

    def __post_init__(self) -> None:
        if len(self.dropout) != len(self.layer_widths):
            raise ValueError("need one dropout probability per hidden layer")
        if any(w <= 0 for w in self.layer_widths):
            raise ValueError("layer widths must be positive")
        if any(not 0.0 <= p < 1.0 for p in self.dropout):
            raise ValueError("dropout probabilities must lie in [0, 1)")
        if self.output_dim != 2:
            raise ValueError("binary one-vs-rest heads use a 2-way softmax output")

    def to_dict(self) -> dict:
        return {
            "layer_widths": list(self.layer_widths),
            "dropout": list(self.dropout),
            "use_batchnorm": self.use_batchnorm,
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MLPConfig":
        return cls(
            layer_widths=tuple(data["layer_widths"]),
            dropout=tuple(data["dropout"]),
            use_batchnorm=bool(data["use_batchnorm"]),
            input_dim=int(data["input_dim"]),
            output_dim=int(data["output_dim"]),
        )


def cic_architecture(input_dim: int = 66) -> MLPConfig:
    """Three hidden layers [128, 64, 32], uniform dropout 0.3, no batch norm."""
    return MLPConfig(layer_widths=(128, 64, 32), dropout=(0.3, 0.3, 0.3), input_dim=input_dim)


def unsw_architecture(input_dim: int = 66) -> MLPConfig:
    """Four hidden layers [256, 128, 64, 32], batch norm, dropout graduated 0.4 to 0.2."""
    graduated = tuple(np.linspace(0.4, 0.2, 4).tolist())
    return MLPConfig(
        layer_widths=(256, 128, 64, 32),
        dropout=graduated,
        use_batchnorm=True,
        input_dim=input_dim,
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class MLPModel:
    """One trained (or trainable) binary classifier head.

    Weight matrices are stored row-major as (out, in). After training the
    model is treated as immutable: eval-mode forward is deterministic and
    safe for concurrent use.
    """

    def __init__(
        self,
        config: MLPConfig,
        target_class: ClassLabel,
        seed: int = 0,
        metadata: dict | None = None,
    ) -> None:
        self.config = config
        self.target_class = target_class
        self.metadata: dict = metadata or {}

        rng = np.random.default_rng(seed)
        dims = [config.input_dim, *config.layer_widths, config.output_dim]
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            # He-style uniform scaling by fan-in, appropriate for ReLU.
            limit = np.sqrt(6.0 / fan_in)
            self.weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

        n_hidden = len(config.layer_widths)
        if config.use_batchnorm:
            self.bn_gamma = [np.ones(w) for w in config.layer_widths]
            self.bn_beta = [np.zeros(w) for w in config.layer_widths]
            self.bn_running_mean = [np.zeros(w) for w in config.layer_widths]
            self.bn_running_var = [np.ones(w) for w in config.layer_widths]
        else:
            self.bn_gamma = self.bn_beta = [None] * n_hidden
            self.bn_running_mean = self.bn_running_var = [None] * n_hidden

    # -- parameter plumbing -------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        params = []
        for i in range(len(self.weights)):
            params.extend([self.weights[i], self.biases[i]])
        if self.config.use_batchnorm:
            for i in range(len(self.bn_gamma)):
                params.extend([self.bn_gamma[i], self.bn_beta[i]])
        return params

    def snapshot(self) -> dict:
        return {
            "weights": [w.copy() for w in self.weights],
            "biases": [b.copy() for b in self.biases],
            "bn_gamma": copy.deepcopy(self.bn_gamma),
            "bn_beta": copy.deepcopy(self.bn_beta),
            "bn_running_mean": copy.deepcopy(self.bn_running_mean),
            "bn_running_var": copy.deepcopy(self.bn_running_var),
        }

    def restore(self, snap: dict) -> None:
        for i, w in enumerate(snap["weights"]):
            self.weights[i][...] = w
        for i, b in enumerate(snap["biases"]):
            self.biases[i][...] = b
        if self.config.use_batchnorm:
            for i in range(len(self.bn_gamma)):
                self.bn_gamma[i][...] = snap["bn_gamma"][i]
                self.bn_beta[i][...] = snap["bn_beta"][i]
                self.bn_running_mean[i][...] = snap["bn_running_mean"][i]
                self.bn_running_var[i][...] = snap["bn_running_var"][i]

    # -- forward ------------------------------------------------------------

    def forward(
        self,
        x: np.ndarray,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> np.ndarray:
        """Run the network; returns class probabilities of shape (n, 2)."""
        probs, _ = self.forward_full(x, train=train, rng=rng)
        return probs

    def forward_full(
        self,
        x: np.ndarray,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[np.ndarray, dict]:
        X = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if X.shape[1] != self.config.input_dim:
            raise ValueError(
                f"input width {X.shape[1]} does not match model input_dim "
                f"{self.config.input_dim}"
            )
        if train and any(p > 0 for p in self.config.dropout) and rng is None:
            raise ValueError("train-mode forward with dropout requires an RNG")

        cache: dict = {"inputs": [], "pre_bn": [], "bn": [], "post_relu": [], "masks": []}
        H = X
        for l, width in enumerate(self.config.layer_widths):
            cache["inputs"].append(H)
            Z = H @ self.weights[l].T + self.biases[l]
            cache["pre_bn"].append(Z)
            if self.config.use_batchnorm:
                Y, bn_cache = self._bn_forward(Z, l, train)
            else:
                Y, bn_cache = Z, None
            cache["bn"].append(bn_cache)
            H = np.maximum(Y, 0.0)
            cache["post_relu"].append((Y, H))
            p = self.config.dropout[l]
            if train and p > 0.0:
                mask = (rng.random(H.shape) >= p) / (1.0 - p)
                H = H * mask
            else:
                mask = None
            cache["masks"].append(mask)

        cache["inputs"].append(H)
        logits = H @ self.weights[-1].T + self.biases[-1]
        if not np.all(np.isfinite(logits)):
            raise FloatingPointError("non-finite activations in forward pass")
        probs = softmax(logits)
        cache["probs"] = probs
        return probs, cache

    def _bn_forward(self, Z: np.ndarray, l: int, train: bool) -> tuple[np.ndarray, dict]:
        gamma, beta = self.bn_gamma[l], self.bn_beta[l]
        if train:
            mean = Z.mean(axis=0)
            var = Z.var(axis=0)
            self.bn_running_mean[l][...] = (
                _BN_MOMENTUM * self.bn_running_mean[l] + (1 - _BN_MOMENTUM) * mean
            )
            self.bn_running_var[l][...] = (
                _BN_MOMENTUM * self.bn_running_var[l] + (1 - _BN_MOMENTUM) * var
            )
        else:
            mean = self.bn_running_mean[l]
            var = self.bn_running_var[l]
        ivar = 1.0 / np.sqrt(var + _BN_EPS)
        xhat = (Z - mean) * ivar
        out = gamma * xhat + beta
        return out, {"xhat": xhat, "ivar": ivar, "train": train}

    # -- backward -----------------------------------------------------------

    def backward(self, cache: dict, dlogits: np.ndarray) -> dict:
        """Backpropagate from output-logit gradients.

        Returns gradients for every array in parameters() order plus the
        gradient with respect to the network input under key "dx".
        """
        dW: list[np.ndarray] = [np.empty(0)] * len(self.weights)
        db: list[np.ndarray] = [np.empty(0)] * len(self.biases)
        dgamma: list[np.ndarray | None] = [None] * len(self.config.layer_widths)
        dbeta: list[np.ndarray | None] = [None] * len(self.config.layer_widths)

        H_last = cache["inputs"][-1]
        dW[-1] = dlogits.T @ H_last
        db[-1] = dlogits.sum(axis=0)
        dH = dlogits @ self.weights[-1]

        for l in range(len(self.config.layer_widths) - 1, -1, -1):
            mask = cache["masks"][l]
            if mask is not None:
                dH = dH * mask
            Y, _ = cache["post_relu"][l]
            dY = dH * (Y > 0.0)
            if self.config.use_batchnorm:
                dZ, dg, dbta = self._bn_backward(dY, cache["bn"][l], l)
                dgamma[l], dbeta[l] = dg, dbta
            else:
                dZ = dY
            H_in = cache["inputs"][l]
            dW[l] = dZ.T @ H_in
            db[l] = dZ.sum(axis=0)
            dH = dZ @ self.weights[l]

        grads = []
        for i in range(len(self.weights)):
            grads.extend([dW[i], db[i]])
        if self.config.use_batchnorm:
            for i in range(len(dgamma)):
                grads.extend([dgamma[i], dbeta[i]])
        return {"params": grads, "dx": dH}

    def _bn_backward(self, dY: np.ndarray, bn_cache: dict, l: int):
        gamma = self.bn_gamma[l]
        xhat, ivar = bn_cache["xhat"], bn_cache["ivar"]
        dbeta = dY.sum(axis=0)
        dgamma = (dY * xhat).sum(axis=0)
        dxhat = dY * gamma
        if bn_cache["train"]:
            n = dY.shape[0]
            dZ = (ivar / n) * (
                n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
            )
        else:
            # Running statistics are constants in eval mode.
            dZ = dxhat * ivar
        return dZ, dgamma, dbeta

    def input_gradient(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Gradient of the positive-class probability w.r.t. the input.

        Eval-mode only; reuses the training backward pass seeded with the
        softmax Jacobian row of the positive class. Returns (gradients,
        probabilities), one row per input sample.
        """
        probs, cache = self.forward_full(x, train=False)
        p0p1 = (probs[:, 0] * probs[:, 1])[:, None]
        dlogits = np.concatenate([-p0p1, p0p1], axis=1)
        grads = self.backward(cache, dlogits)
        dx = grads["dx"]
        if not np.all(np.isfinite(dx)):
            raise FloatingPointError("non-finite input gradient")
        return dx, probs
