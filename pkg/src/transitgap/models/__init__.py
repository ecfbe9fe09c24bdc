"""The four regressor families plus prediction, metrics, and gradients."""

from ..errors import KindUnsupported
from ..ingest import Dataset
from .artifact import (
    KIND_LINEAR,
    KIND_NEURAL_NET,
    KIND_POLYNOMIAL,
    KIND_RANDOM_FOREST,
    MODEL_KINDS,
    MetricReport,
    ModelArtifact,
    finite_difference_gradient,
    load_artifact,
    metrics,
    predict,
    save_artifact,
)
from .forest import fit_random_forest
from .linear import fit_linear, fit_polynomial
from .neural import fit_neural_net, hidden_preactivations, input_gradient

__all__ = [
    "KIND_LINEAR",
    "KIND_NEURAL_NET",
    "KIND_POLYNOMIAL",
    "KIND_RANDOM_FOREST",
    "MODEL_KINDS",
    "MetricReport",
    "ModelArtifact",
    "finite_difference_gradient",
    "fit",
    "fit_linear",
    "fit_neural_net",
    "fit_polynomial",
    "fit_random_forest",
    "hidden_preactivations",
    "input_gradient",
    "load_artifact",
    "metrics",
    "predict",
    "save_artifact",
]


def fit(train: Dataset, kind: str, seed: int = 0, **hyperparams) -> ModelArtifact:
    """Train one model of the requested kind with its hyperparameters."""
    if kind == KIND_LINEAR:
        return fit_linear(train, seed=seed)
    if kind == KIND_POLYNOMIAL:
        return fit_polynomial(train, seed=seed, **hyperparams)
    if kind == KIND_RANDOM_FOREST:
        return fit_random_forest(train, seed=seed, **hyperparams)
    if kind == KIND_NEURAL_NET:
        return fit_neural_net(train, seed=seed, **hyperparams)
    raise KindUnsupported(f"unknown model kind '{kind}'")
