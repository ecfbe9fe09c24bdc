"""Trained-model artifacts: prediction, metrics, persistence, FD gradients."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..errors import (
    DimensionMismatch,
    KindUnsupported,
    SchemaError,
    ZeroMeanActual,
)
from ..ingest import FeatureSpec

ARTIFACT_FORMAT_VERSION = 1

KIND_LINEAR = "linear"
KIND_POLYNOMIAL = "polynomial"
KIND_RANDOM_FOREST = "random_forest"
KIND_NEURAL_NET = "neural_net"
MODEL_KINDS = (KIND_LINEAR, KIND_POLYNOMIAL, KIND_RANDOM_FOREST, KIND_NEURAL_NET)


@dataclass(frozen=True)
class ModelArtifact:
    """A trained regressor: kind-specific parameters plus training provenance."""

    kind: str
    parameters: Mapping
    spec: FeatureSpec
    seed: int
    training_log: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise KindUnsupported(f"unknown model kind '{self.kind}'")
        if self.kind == KIND_LINEAR:
            expected = self.spec.n_features + 1
            if len(self.parameters["weights"]) != expected:
                raise SchemaError(
                    f"linear weights must have length {expected} (intercept first)"
                )

    def to_dict(self) -> dict:
        return {
            "format_version": ARTIFACT_FORMAT_VERSION,
            "kind": self.kind,
            "spec": self.spec.to_dict(),
            "parameters": _jsonable(self.parameters),
            "seed": self.seed,
            "training_log": list(self.training_log),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ModelArtifact":
        version = data.get("format_version")
        if version != ARTIFACT_FORMAT_VERSION:
            raise SchemaError(f"unsupported artifact format_version {version}")
        return cls(
            kind=data["kind"],
            parameters=data["parameters"],
            spec=FeatureSpec.from_dict(data["spec"]),
            seed=int(data["seed"]),
            training_log=tuple(data["training_log"]),
        )


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Mapping):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def save_artifact(model: ModelArtifact, path) -> Path:
    """Write the artifact as stable, sorted JSON (byte-identical for equal runs)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model.to_dict(), sort_keys=True, indent=2) + "\n")
    return path


def load_artifact(path) -> ModelArtifact:
    return ModelArtifact.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    relative_rmse: float
    n_test: int

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "relative_rmse": self.relative_rmse, "n_test": self.n_test}


def metrics(pred: Sequence[float], actual: Sequence[float]) -> MetricReport:
    """RMSE in raw target units and RMSE relative to the mean actual value."""
    pred = np.asarray(pred, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if pred.shape != actual.shape or pred.ndim != 1 or len(pred) < 1:
        raise DimensionMismatch(
            f"pred and actual must be equal-length vectors, got {pred.shape} vs {actual.shape}"
        )
    mean_actual = float(actual.mean())
    if mean_actual == 0.0:
        raise ZeroMeanActual("relative RMSE undefined: actual targets average to zero")
    rmse = float(np.sqrt(np.mean((pred - actual) ** 2)))
    return MetricReport(rmse=rmse, relative_rmse=rmse / mean_actual, n_test=len(actual))


def _check_features(model: ModelArtifact, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        features = features[None, :]
    if features.shape[1] != model.spec.n_features:
        raise DimensionMismatch(
            f"model expects {model.spec.n_features} features, got {features.shape[1]}"
        )
    return features


def predict(model: ModelArtifact, features) -> np.ndarray:
    """Evaluate the model on a (rows, features) matrix of standardized inputs."""
    from .forest import predict_forest
    from .linear import predict_linear, predict_polynomial
    from .neural import predict_neural

    X = _check_features(model, features)
    if model.kind == KIND_LINEAR:
        return predict_linear(model.parameters, X)
    if model.kind == KIND_POLYNOMIAL:
        return predict_polynomial(model.parameters, X)
    if model.kind == KIND_RANDOM_FOREST:
        return predict_forest(model.parameters, X)
    return predict_neural(model.parameters, X)


def finite_difference_gradient(model: ModelArtifact, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of the model output at a single point.

    Works for every model kind; it is also the validation oracle for the
    exact neural-net gradient.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(len(x)):
        bump = np.zeros_like(x)
        bump[i] = h
        hi = predict(model, (x + bump)[None, :])[0]
        lo = predict(model, (x - bump)[None, :])[0]
        grad[i] = (hi - lo) / (2.0 * h)
    return grad
