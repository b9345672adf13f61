"""Scikit-learn estimator facade over the boosting dynamics."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import diagnostics
from .dataset import Dataset, require_both_labels
from .dynamics import initial_weight, run
from .stumps import build_matrix, enumerate_stumps


class OptimalAdaBoost(BaseEstimator, ClassifierMixin):
    """AdaBoost whose weak learner always returns a minimum-error stump.

    Every round scans all decision stumps (axis thresholds at midpoints
    of adjacent feature values) and selects one with minimum weighted
    error, breaking ties deterministically. The fitted object keeps the
    full weight trajectory, so convergence diagnostics (margins, tie
    gaps, cycles, support vectors) can be read off after training.

    Parameters
    ----------
    n_rounds : int
        Boosting rounds to run.
    init : str
        Initial example weights: "uniform" or "random_simplex".
    random_state : int or None
        Seed for the random-simplex initialization.
    tie_tol : float
        Selection tie tolerance; 0 means exact equality.
    equivalence_eps : float
        Weight resolution below which rows count as equivalent in the
        tie-gap diagnostic; 0 disables merging.
    include_constant : bool
        Also enumerate the two constant hypotheses.
    tail_window : int
        Trailing weight states to keep for cycle detection; 0 keeps none.

    Attributes
    ----------
    classes_ : ndarray of shape (2,)
        Class labels; classes_[1] is the positive class.
    matrix_ : DichotomyMatrix
        Distinct pruned misclassification rows with stump representatives.
    trajectory_ : Trajectory
        Complete round-by-round record of the run.
    halt_ : HaltReason
        Why the run stopped (kind "completed" for a full run).
    """

    def __init__(
        self,
        n_rounds: int = 200,
        init: str = "uniform",
        random_state: int | None = None,
        tie_tol: float = 0.0,
        equivalence_eps: float = 0.0,
        include_constant: bool = False,
        tail_window: int = 0,
    ):
        self.n_rounds = n_rounds
        self.init = init
        self.random_state = random_state
        self.tie_tol = tie_tol
        self.equivalence_eps = equivalence_eps
        self.include_constant = include_constant
        self.tail_window = tail_window

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = unique_labels(y)
        if self.classes_.shape[0] != 2:
            raise ValueError(
                f"need exactly 2 classes, got {self.classes_.shape[0]}"
            )
        signed = np.where(y == self.classes_[1], 1, -1).astype(np.int8)
        ds = Dataset(X, signed)
        require_both_labels(ds)
        hypotheses = enumerate_stumps(ds, include_constant=self.include_constant)
        self.matrix_ = build_matrix(ds, hypotheses)
        w1 = initial_weight(ds.m, self.init, self.random_state)
        self.trajectory_, self.halt_ = run(
            self.matrix_,
            w1,
            self.n_rounds,
            tie_tol=self.tie_tol,
            equivalence_eps=self.equivalence_eps,
            tail_window=self.tail_window,
        )
        if self.trajectory_.n_rounds == 0:
            raise ValueError(
                f"no round completed: halted with {self.halt_.kind} "
                f"at round {self.halt_.at_round}"
            )
        self.n_features_in_ = ds.d
        return self

    def decision_function(self, X) -> np.ndarray:
        """Average vote score; positive favors classes_[1]."""
        check_is_fitted(self, "trajectory_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return diagnostics.ensemble_score(
            X, self.trajectory_, self.matrix_.representatives
        )

    def predict(self, X) -> np.ndarray:
        score = self.decision_function(X)
        return self.classes_[(score > 0).astype(np.intp)]

    def margin_snapshot(self) -> diagnostics.MarginSnapshot:
        """Training margins at the end of the run."""
        check_is_fitted(self, "trajectory_")
        return diagnostics.margin_snapshot(self.trajectory_)
