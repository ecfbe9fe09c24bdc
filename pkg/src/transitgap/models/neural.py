"""Feedforward ReLU regressor trained with Adam, plus exact input gradients.

Architecture default: two hidden layers of ten units, identity output.
Targets are normalized internally for optimization (the normalization is
stored in the artifact); predictions are always in raw target units.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..errors import DivergedLoss, KindUnsupported, TooFewRows
from ..ingest import Dataset
from .artifact import KIND_NEURAL_NET, ModelArtifact

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# A finite loss this far above the starting loss counts as divergence.
LOSS_EXPLOSION_FACTOR = 1e9


def _init_layers(layer_sizes: Sequence[int], rng: np.random.Generator):
    weights = []
    biases = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward(weights, biases, X):
    """Returns hidden activations, hidden pre-activations, and outputs."""
    activations = [X]
    preacts = []
    a = X
    for W, b in zip(weights[:-1], biases[:-1]):
        z = a @ W + b
        preacts.append(z)
        a = np.maximum(z, 0.0)
        activations.append(a)
    out = a @ weights[-1] + biases[-1]
    return activations, preacts, out[:, 0]


def _gradients(weights, biases, X, y):
    """Backprop of mean squared error over the batch."""
    activations, preacts, out = _forward(weights, biases, X)
    n = X.shape[0]
    delta = (2.0 / n) * (out - y)[:, None]  # d loss / d output
    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grads_w[layer] = activations[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (preacts[layer - 1] > 0.0)
    loss = float(np.mean((out - y) ** 2))
    return grads_w, grads_b, loss


def fit_neural_net(
    train: Dataset,
    hidden: Sequence[int] = (10, 10),
    epochs: int = 2000,
    step: float = 1e-3,
    batch: int | None = None,
    seed: int = 0,
) -> ModelArtifact:
    """Train by full-batch (or mini-batch) Adam on mean squared error.

    training_log[k] is the full-data loss (normalized target units) before
    epoch k; the final entry is the post-training loss.
    """
    n = train.n_rows
    if n < 5:
        raise TooFewRows(f"need at least 5 rows to train, got {n}")
    rng = np.random.default_rng(seed)
    layer_sizes = [train.spec.n_features, *hidden, 1]
    weights, biases = _init_layers(layer_sizes, rng)

    t_mean = float(train.targets.mean())
    t_std = float(train.targets.std())
    if t_std == 0.0:
        t_std = 1.0
    X = train.features
    y = (train.targets - t_mean) / t_std

    m_w = [np.zeros_like(W) for W in weights]
    v_w = [np.zeros_like(W) for W in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]

    def full_loss() -> float:
        _, _, out = _forward(weights, biases, X)
        return float(np.mean((out - y) ** 2))

    log: list[float] = []
    explosion = None
    t = 0
    for epoch in range(epochs):
        if batch is None:
            grads_w, grads_b, loss = _gradients(weights, biases, X, y)
            log.append(loss)
            batches = [(grads_w, grads_b)]
        else:
            loss = full_loss()
            log.append(loss)
            order = rng.permutation(n)
            batches = []
            for start in range(0, n, batch):
                sel = order[start : start + batch]
                gw, gb, _ = _gradients(weights, biases, X[sel], y[sel])
                batches = batches + [(gw, gb)]
        if explosion is None:
            explosion = LOSS_EXPLOSION_FACTOR * max(loss, 1.0)
        if not np.isfinite(loss) or loss > explosion:
            raise DivergedLoss(f"loss {loss} at epoch {epoch} (initial {log[0]})")
        for grads_w, grads_b in batches:
            t += 1
            correct1 = 1.0 - ADAM_BETA1**t
            correct2 = 1.0 - ADAM_BETA2**t
            for layer in range(len(weights)):
                for param, grad, m, v in (
                    (weights[layer], grads_w[layer], m_w[layer], v_w[layer]),
                    (biases[layer], grads_b[layer], m_b[layer], v_b[layer]),
                ):
                    m *= ADAM_BETA1
                    m += (1.0 - ADAM_BETA1) * grad
                    v *= ADAM_BETA2
                    v += (1.0 - ADAM_BETA2) * grad * grad
                    param -= step * (m / correct1) / (np.sqrt(v / correct2) + ADAM_EPS)

    final = full_loss()
    log.append(final)
    if not np.isfinite(final) or final > explosion:
        raise DivergedLoss(f"final loss {final} (initial {log[0]})")
    if final > log[0]:
        raise DivergedLoss(f"training made the loss worse: {log[0]} -> {final}")

    return ModelArtifact(
        kind=KIND_NEURAL_NET,
        parameters={
            "layer_sizes": layer_sizes,
            "weights": [W.tolist() for W in weights],
            "biases": [b.tolist() for b in biases],
            "activation": "relu",
            "target_mean": t_mean,
            "target_std": t_std,
        },
        spec=train.spec,
        seed=seed,
        training_log=tuple(log),
    )


def _unpack(parameters: Mapping):
    weights = [np.asarray(W, dtype=float) for W in parameters["weights"]]
    biases = [np.asarray(b, dtype=float) for b in parameters["biases"]]
    return weights, biases


def predict_neural(parameters: Mapping, X: np.ndarray) -> np.ndarray:
    weights, biases = _unpack(parameters)
    _, _, out = _forward(weights, biases, X)
    return out * parameters["target_std"] + parameters["target_mean"]


def input_gradient(model: ModelArtifact, x) -> np.ndarray:
    """Exact gradient of the scalar output w.r.t. one standardized input row.

    ReLU derivative at exactly zero is taken as zero.
    """
    if model.kind != KIND_NEURAL_NET:
        raise KindUnsupported(
            f"exact input gradients need a neural net, got '{model.kind}'"
        )
    x = np.asarray(x, dtype=float)
    weights, biases = _unpack(model.parameters)
    _, preacts, _ = _forward(weights, biases, x[None, :])
    grad = weights[-1][:, 0]
    for layer in range(len(weights) - 2, -1, -1):
        grad = weights[layer] @ (grad * (preacts[layer][0] > 0.0))
    return grad * model.parameters["target_std"]


def hidden_preactivations(model: ModelArtifact, x) -> list[np.ndarray]:
    """Hidden-layer pre-activations at a point (for ReLU-kink proximity checks)."""
    if model.kind != KIND_NEURAL_NET:
        raise KindUnsupported("pre-activations are only defined for neural nets")
    weights, biases = _unpack(model.parameters)
    x = np.asarray(x, dtype=float)
    _, preacts, _ = _forward(weights, biases, x[None, :])
    return [z[0] for z in preacts]
