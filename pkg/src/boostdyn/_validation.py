"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

SIMPLEX_TOL = 1e-12


def check_feature_matrix(X) -> np.ndarray:
    """Coerce to a finite 2-d float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"feature matrix must be 2-d, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("feature matrix contains NaN or infinite values")
    return X


def check_labels(y, m: int | None = None) -> np.ndarray:
    """Coerce to a 1-d array of -1/+1 labels."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-d, got shape {y.shape}")
    if m is not None and y.shape[0] != m:
        raise ValueError(f"expected {m} labels, got {y.shape[0]}")
    out = y.astype(np.int8, casting="unsafe")
    if not np.array_equal(out, y):
        raise ValueError("labels must be integers -1 or +1")
    bad = set(np.unique(out)) - {-1, 1}
    if bad:
        raise ValueError(f"labels must be -1 or +1, found {sorted(bad)}")
    return out


def check_weight_vector(w, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Coerce to a float64 probability vector: nonnegative, sums to 1 within tol."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError(f"weight vector must be 1-d, got shape {w.shape}")
    if w.shape[0] == 0:
        raise ValueError("weight vector is empty")
    if not np.isfinite(w).all():
        raise ValueError("weight vector contains NaN or infinite values")
    if (w < 0).any():
        raise ValueError("weight vector has negative entries")
    total = float(w.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"weight vector sums to {total!r}, expected 1 within {tol:g}")
    return w


def check_bit_row(row, m: int | None = None) -> np.ndarray:
    """Coerce to a 1-d uint8 array of 0/1 bits."""
    row = np.asarray(row)
    if row.ndim != 1:
        raise ValueError(f"bit row must be 1-d, got shape {row.shape}")
    if m is not None and row.shape[0] != m:
        raise ValueError(f"expected bit row of length {m}, got {row.shape[0]}")
    out = row.astype(np.uint8, casting="unsafe")
    if not np.array_equal(out, row) or ((out != 0) & (out != 1)).any():
        raise ValueError("bit row entries must be 0 or 1")
    return out
