"""Shared builders for tests that need hand-made matrices or trajectories."""

import numpy as np

from boostdyn.dynamics import Trajectory
from boostdyn.stumps import DichotomyMatrix


def textbook_adaboost(rows, w1, T):
    """Plain multiplicative-update boosting: w *= exp(+-alpha), renormalize.

    Independent of the library's closed-form update; used as an oracle.
    Returns (states, picks) with states[0] = w1.
    """
    R = np.asarray(rows, dtype=np.float64)
    w = np.asarray(w1, dtype=np.float64).copy()
    states = [w.copy()]
    picks = []
    for _ in range(T):
        errs = R @ w
        k = int(np.argmin(errs))
        eps = float(errs[k])
        alpha = 0.5 * np.log((1.0 - eps) / eps)
        w = w * np.where(R[k] == 1, np.exp(alpha), np.exp(-alpha))
        w = w / w.sum()
        states.append(w.copy())
        picks.append(k)
    return np.array(states), picks


def mat(rows, representatives=None):
    return DichotomyMatrix(
        rows=np.asarray(rows, dtype=np.uint8),
        representatives=tuple(representatives) if representatives is not None else None,
    )


def make_traj(selected, alpha, m, n_rows, rows=None, tail=None):
    """Trajectory with the given round data and dummy audit fields.

    Only the fields the diagnostics read are made consistent: selection
    counts, alpha masses, margin numerators (when rows are given), and
    an optional tail of weight states for cycle detection.
    """
    selected = np.asarray(selected, dtype=np.int64)
    alpha = np.asarray(alpha, dtype=np.float64)
    T = selected.shape[0]
    counts = np.bincount(selected, minlength=n_rows)
    mass = np.bincount(selected, weights=alpha, minlength=n_rows)
    if rows is not None:
        R = np.asarray(rows, dtype=np.float64)
        margin_num = alpha.sum() - 2.0 * (mass @ R)
    else:
        margin_num = np.zeros(m, dtype=np.float64)
    w1 = np.full(m, 1.0 / m)
    if tail is not None:
        tail = np.asarray(tail, dtype=np.float64)
        tail_start = T + 2 - tail.shape[0]
        snapshot_states = np.arange(tail_start, T + 2, dtype=np.int64)
        snapshot_weights = tail
        final = tail[-1]
    else:
        tail_start = None
        snapshot_states = np.array([1], dtype=np.int64)
        snapshot_weights = w1[None, :]
        final = w1
    return Trajectory(
        initial_weight=w1,
        final_weight=final,
        selected=selected,
        eps=np.full(T, 0.25),
        alpha=alpha,
        tie_count=np.ones(T, dtype=np.int64),
        tie_gap=np.full(T, np.inf),
        merged_away=np.zeros(T, dtype=np.int64),
        min_row_error=np.full(T, 0.25),
        margin_numerator=margin_num,
        alpha_sum=float(alpha.sum()),
        selection_count=counts,
        alpha_mass=mass,
        snapshot_states=snapshot_states,
        snapshot_weights=snapshot_weights,
        tail_start=tail_start,
        tail_weights=tail,
    )
