"""Shared test utilities: dataset construction and independent oracles."""

import numpy as np

from transitgap.ingest import Dataset, FeatureSpec


def make_dataset(X, y, row_prefix="r"):
    """Wrap raw arrays into a Dataset, standardizing features column-wise."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    spec = FeatureSpec(
        feature_names=tuple(f"x{j}" for j in range(X.shape[1])),
        encodings=tuple("numeric" for _ in range(X.shape[1])),
        means=tuple(float(m) for m in means),
        stds=tuple(float(s) for s in stds),
        target="y",
    )
    return Dataset(
        features=(X - means) / stds,
        targets=y,
        spec=spec,
        row_ids=tuple(f"{row_prefix}{i}" for i in range(X.shape[0])),
    )


def standardized_dataset(X, y, row_prefix="r"):
    """Dataset whose features are used as-is (already standardized-ish).

    Standardization stats are identity so model inputs equal the given X.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    spec = FeatureSpec(
        feature_names=tuple(f"x{j}" for j in range(X.shape[1])),
        encodings=tuple("numeric" for _ in range(X.shape[1])),
        means=tuple(0.0 for _ in range(X.shape[1])),
        stds=tuple(1.0 for _ in range(X.shape[1])),
        target="y",
    )
    return Dataset(
        features=X,
        targets=y,
        spec=spec,
        row_ids=tuple(f"{row_prefix}{i}" for i in range(X.shape[0])),
    )


def pseudoinverse_least_squares(X, y):
    """Independent least-squares oracle: SVD pseudo-inverse, intercept first.

    Deliberately a different code path from the normal-equations solver under
    test.
    """
    X = np.asarray(X, dtype=float)
    design = np.hstack([np.ones((X.shape[0], 1)), X])
    u, s, vt = np.linalg.svd(design, full_matrices=False)
    s_inv = np.array([1.0 / v if v > 1e-12 * s[0] else 0.0 for v in s])
    return vt.T @ (s_inv * (u.T @ y))
