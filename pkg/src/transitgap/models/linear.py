"""Ordinary least squares and polynomial regression via normal equations."""

from __future__ import annotations

import math
from itertools import combinations_with_replacement
from typing import Mapping

import numpy as np

from ..errors import ExpansionTooLarge, SingularDesign
from ..ingest import Dataset
from .artifact import KIND_LINEAR, KIND_POLYNOMIAL, ModelArtifact

RIDGE_JITTER = 1e-10


def _solve_normal_equations(
    X: np.ndarray, y: np.ndarray, allow_rank_deficient: bool = False
) -> np.ndarray:
    """Solve min ||Xw - y|| via the normal equations.

    Rank-deficient designs are rejected unless ``allow_rank_deficient`` is
    set, in which case a small ridge jitter on the Gram diagonal picks a
    stable solution (polynomial expansions can be structurally collinear,
    e.g. sin^2 + cos^2 from a cyclic encoding). A numerically singular Gram
    matrix gets the same jittered retry.
    """
    deficient = np.linalg.matrix_rank(X) < X.shape[1]
    if deficient and not allow_rank_deficient:
        raise SingularDesign(
            f"design matrix rank deficient: rank < {X.shape[1]} columns"
        )
    gram = X.T @ X
    rhs = X.T @ y
    w = None
    if not deficient:
        try:
            w = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            w = None
    if w is None or not np.all(np.isfinite(w)):
        jittered = gram + RIDGE_JITTER * np.eye(gram.shape[0])
        try:
            w = np.linalg.solve(jittered, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularDesign("Gram matrix singular even after ridge jitter") from exc
        if not np.all(np.isfinite(w)):
            raise SingularDesign("Gram matrix singular even after ridge jitter")
    return w


def _with_intercept(X: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((X.shape[0], 1)), X])


def fit_linear(train: Dataset, seed: int = 0) -> ModelArtifact:
    """Ordinary least squares; weights stored intercept-first."""
    Xd = _with_intercept(train.features)
    w = _solve_normal_equations(Xd, train.targets)
    residual = train.targets - Xd @ w
    sse = float(residual @ residual)
    return ModelArtifact(
        kind=KIND_LINEAR,
        parameters={"weights": [float(v) for v in w]},
        spec=train.spec,
        seed=seed,
        training_log=(sse,),
    )


def predict_linear(parameters: Mapping, X: np.ndarray) -> np.ndarray:
    w = np.asarray(parameters["weights"], dtype=float)
    return w[0] + X @ w[1:]


def monomial_exponents(n_features: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent vectors of all monomials with total degree 1..degree."""
    exponents = []
    for d in range(1, degree + 1):
        for combo in combinations_with_replacement(range(n_features), d):
            exp = [0] * n_features
            for j in combo:
                exp[j] += 1
            exponents.append(tuple(exp))
    return exponents


def _expand(X: np.ndarray, exponents: list[tuple[int, ...]]) -> np.ndarray:
    out = np.empty((X.shape[0], len(exponents)))
    for k, exp in enumerate(exponents):
        col = np.ones(X.shape[0])
        for j, e in enumerate(exp):
            if e:
                col = col * X[:, j] ** e
        out[:, k] = col
    return out


def fit_polynomial(train: Dataset, degree: int = 2, seed: int = 0) -> ModelArtifact:
    """Least squares over the full monomial expansion (interactions included)."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    k = train.spec.n_features
    n_terms = math.comb(k + degree, degree)  # monomials of degree <= degree
    if n_terms >= train.n_rows:
        raise ExpansionTooLarge(
            f"degree-{degree} expansion of {k} features has {n_terms} terms "
            f"but only {train.n_rows} rows"
        )
    exponents = monomial_exponents(k, degree)
    Xe = _with_intercept(_expand(train.features, exponents))
    w = _solve_normal_equations(Xe, train.targets, allow_rank_deficient=True)
    residual = train.targets - Xe @ w
    return ModelArtifact(
        kind=KIND_POLYNOMIAL,
        parameters={
            "degree": degree,
            "exponents": [list(e) for e in exponents],
            "weights": [float(v) for v in w],
        },
        spec=train.spec,
        seed=seed,
        training_log=(float(residual @ residual),),
    )


def predict_polynomial(parameters: Mapping, X: np.ndarray) -> np.ndarray:
    exponents = [tuple(e) for e in parameters["exponents"]]
    w = np.asarray(parameters["weights"], dtype=float)
    return w[0] + _expand(X, exponents) @ w[1:]
