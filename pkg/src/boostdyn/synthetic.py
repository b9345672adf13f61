"""Synthetic datasets exercising distinct regimes of the dynamics."""

from __future__ import annotations

import numpy as np

from .dataset import Dataset


def two_gaussians(
    m: int = 200,
    d: int = 2,
    seed: int = 0,
    separation: float = 2.0,
    scale: float = 1.0,
) -> Dataset:
    """Two overlapping Gaussian clouds with opposite labels.

    The positive class is centered `separation` away from the origin
    along every axis. Overlap keeps the classes non-separable by a
    single stump, so runs exercise the generic long-run regime.
    """
    if m < 4:
        raise ValueError(f"need m >= 4, got {m}")
    rng = np.random.default_rng(seed)
    n_pos = m // 2
    X = rng.normal(0.0, scale, size=(m, d))
    X[:n_pos] += separation
    y = np.full(m, -1, dtype=np.int8)
    y[:n_pos] = 1
    return Dataset(X, y, tuple(f"x{j}" for j in range(d)))


def rudin3() -> Dataset:
    """Three examples whose pruned dichotomy matrix is the three unit rows.

    Each surviving row misclassifies exactly one example, the classic
    small instance whose dynamics settle into a stable cycle. Realizing
    the row that misclassifies only the minority-label example needs the
    always-positive constant hypothesis, so enumerate hypotheses with
    include_constant=True when boosting this dataset.
    """
    X = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, 0.0]])
    y = np.array([1, 1, -1], dtype=np.int8)
    return Dataset(X, y, ("x0", "x1"))


def xor_grid(m: int = 120, seed: int = 0, jitter: float = 0.15) -> Dataset:
    """Jittered grid labeled by quadrant parity, a non-stump-separable layout.

    Labels follow sign(x0) * sign(x1) of the pre-jitter grid position.
    No single threshold gets far below one-half error, so boosting must
    keep cycling through hypotheses; the trimmed grid (m need not fill a
    square) plus jitter keeps the best stump strictly below one half at
    the uniform start.
    """
    if m < 8:
        raise ValueError(f"need m >= 8, got {m}")
    side = int(np.ceil(np.sqrt(m)))
    spacing = 2.0 / (side - 1)
    # a fractional offset keeps every grid value away from 0, so quadrant
    # signs are unambiguous, and breaks symmetry between the quadrants
    axis = np.linspace(-1.0, 1.0, side) + 0.137 * spacing
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    base = np.column_stack([gx.ravel(), gy.ravel()])[:m]
    rng = np.random.default_rng(seed)
    X = base + rng.normal(0.0, jitter * spacing, size=base.shape)
    y = np.where(np.sign(base[:, 0]) * np.sign(base[:, 1]) > 0, 1, -1).astype(np.int8)
    return Dataset(X, y, ("x0", "x1"))


GENERATORS = {
    "two_gaussians": two_gaussians,
    "rudin3": rudin3,
    "xor_grid": xor_grid,
}


def make(kind: str, **params) -> Dataset:
    """Dispatch by generator name; unknown names raise ValueError."""
    try:
        gen = GENERATORS[kind]
    except KeyError:
        raise ValueError(
            f"unknown synthetic dataset {kind!r}; choose from {sorted(GENERATORS)}"
        ) from None
    return gen(**params)
