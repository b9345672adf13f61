"""Convergence diagnostics computed over finished trajectories.

Everything here is pure: functions read a Trajectory (plus the matrix or
dataset where needed) and return plain values, so they can run on
immutable run data in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_weight_vector
from .dynamics import BoostHalt, Trajectory, boost_step
from .stumps import DichotomyMatrix, EquivalenceTracker

MARGIN_BINS = 200


@dataclass(frozen=True)
class MarginSnapshot:
    """Normalized voting margins after a given number of rounds.

    beta(i) is the alpha-weighted fraction of rounds that classified
    example i correctly minus the fraction that got it wrong, so it lies
    in [-1, 1]. The histogram uses MARGIN_BINS equal bins over [-1, 1].
    """

    round: int
    beta: np.ndarray
    min_margin: float
    histogram: np.ndarray
    bin_edges: np.ndarray


def _snapshot_from_numerator(t: int, numerator: np.ndarray, alpha_sum: float) -> MarginSnapshot:
    if t < 1:
        raise ValueError("margins undefined before the first round")
    if alpha_sum <= 0.0:
        raise ValueError(f"vote weights sum to {alpha_sum}; margins undefined")
    beta = numerator / alpha_sum
    # rounding can push |beta| past 1 by an ulp; clip for binning only
    hist, edges = np.histogram(
        np.clip(beta, -1.0, 1.0), bins=MARGIN_BINS, range=(-1.0, 1.0)
    )
    return MarginSnapshot(t, beta, float(beta.min()), hist, edges)


def margin_snapshot(traj: Trajectory) -> MarginSnapshot:
    """Margins at the end of the run."""
    return _snapshot_from_numerator(
        traj.n_rounds, traj.margin_numerator, traj.alpha_sum
    )


def margin_snapshot_at(traj: Trajectory, matrix: DichotomyMatrix, t: int) -> MarginSnapshot:
    """Margins as they stood after round t, recomputed from the round log."""
    if not 1 <= t <= traj.n_rounds:
        raise ValueError(f"round {t} outside 1..{traj.n_rounds}")
    mass = np.bincount(
        traj.selected[:t], weights=traj.alpha[:t], minlength=matrix.n
    )
    alpha_sum = float(traj.alpha[:t].sum())
    numerator = alpha_sum - 2.0 * (mass @ matrix.rows_f64)
    return _snapshot_from_numerator(t, numerator, alpha_sum)


def min_margin_trace(snapshots) -> list[tuple[int, float]]:
    """(round, minimum margin) pairs from a sequence of snapshots."""
    return [(s.round, s.min_margin) for s in snapshots]


@dataclass(frozen=True)
class TieGapRecord:
    """Distance from the best row's error to the nearest genuine rival.

    Rows equivalent to the winner at weight resolution eps are not
    rivals; the gap is inf when no rival remains. merged_away counts the
    rows absorbed into some equivalence class.
    """

    gap: float
    merged_away: int
    best_row: int


def tie_gap(matrix: DichotomyMatrix, w, eps: float = 0.0) -> TieGapRecord:
    """Gap between the best row and the best non-equivalent row at w."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    w = check_weight_vector(w)
    errs = matrix.errors(w)
    k = int(np.argmin(errs))
    if eps > 0:
        cls = EquivalenceTracker(matrix.rows, eps).classes(w)
        merged = matrix.n - len(np.unique(cls))
        outside = cls != cls[k]
        gap = float(errs[outside].min() - errs[k]) if outside.any() else math.inf
    else:
        merged = 0
        gap = (
            float(np.partition(errs, 1)[1] - errs[k]) if matrix.n > 1 else math.inf
        )
    return TieGapRecord(gap=gap, merged_away=merged, best_row=k)


@dataclass(frozen=True)
class BirkhoffReport:
    """Running means of a per-round series with drift at checkpoints.

    drift[j] = |mean over first checkpoint[j] rounds - mean over first
    checkpoint[j]//2 rounds|, the standard convergence probe for time
    averages.
    """

    running_mean: np.ndarray
    checkpoints: np.ndarray
    drift: np.ndarray


def birkhoff_average(series, checkpoints=None) -> BirkhoffReport:
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1 or series.shape[0] == 0:
        raise ValueError("need a nonempty 1-d series")
    T = series.shape[0]
    running = np.cumsum(series) / np.arange(1, T + 1)
    if checkpoints is None:
        cps = [2**k for k in range(1, T.bit_length()) if 2**k <= T]
        if not cps or cps[-1] != T:
            cps.append(T)
        checkpoints = cps
    checkpoints = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if checkpoints.size == 0 or checkpoints[0] < 2 or checkpoints[-1] > T:
        raise ValueError("checkpoints must lie in 2..T")
    drift = np.abs(
        running[checkpoints - 1] - running[checkpoints // 2 - 1]
    )
    return BirkhoffReport(running, checkpoints, drift)


@dataclass(frozen=True)
class SelectionFrequencies:
    """How often each row was selected, by count and by vote-weight share.

    by_count and by_alpha are aligned by row index; `order` sorts rows by
    count share descending (row index breaks ties) for reporting.
    """

    by_count: np.ndarray
    by_alpha: np.ndarray
    order: np.ndarray


def selection_frequencies(traj: Trajectory, upto: int | None = None) -> SelectionFrequencies:
    T = traj.n_rounds if upto is None else int(upto)
    if not 1 <= T <= traj.n_rounds:
        raise ValueError(f"round {upto} outside 1..{traj.n_rounds}")
    n = traj.selection_count.shape[0]
    if upto is None:
        counts = traj.selection_count.astype(np.float64)
        mass = traj.alpha_mass
    else:
        counts = np.bincount(traj.selected[:T], minlength=n).astype(np.float64)
        mass = np.bincount(traj.selected[:T], weights=traj.alpha[:T], minlength=n)
    alpha_sum = float(mass.sum())
    by_count = counts / T
    by_alpha = mass / alpha_sum if alpha_sum > 0 else np.zeros_like(mass)
    order = np.lexsort((np.arange(n), -by_count))
    return SelectionFrequencies(by_count, by_alpha, order)


def unique_selection_trace(traj: Trajectory) -> np.ndarray:
    """Cumulative count of distinct rows selected through each round."""
    sel = traj.selected
    if sel.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    first = np.zeros(sel.shape[0], dtype=np.int64)
    _, first_idx = np.unique(sel, return_index=True)
    first[first_idx] = 1
    return np.cumsum(first)


@dataclass(frozen=True)
class SupportVectorReport:
    """Examples that keep the dynamics busy in the long run.

    Two selection rules that should asymptotically agree: positive final
    weight (above weight_tol) and margin within margin_tol of the
    minimum. weighted_margin is the final-weight average of margins; its
    distance to min_margin shrinks as the run converges and is reported
    as drift.
    """

    by_weight: tuple[int, ...]
    by_margin: tuple[int, ...]
    agree: bool
    weight_tol: float
    margin_tol: float
    min_margin: float
    weighted_margin: float
    drift: float
    positive_in_weight_set: int
    negative_in_weight_set: int


def support_vectors(
    traj: Trajectory,
    snapshot: MarginSnapshot,
    labels,
    weight_tol: float = 1e-8,
    margin_tol: float = 1e-2,
) -> SupportVectorReport:
    labels = np.asarray(labels)
    if labels.shape[0] != traj.m:
        raise ValueError(f"{labels.shape[0]} labels for {traj.m} examples")
    by_weight = np.flatnonzero(traj.final_weight > weight_tol)
    by_margin = np.flatnonzero(snapshot.beta - snapshot.min_margin < margin_tol)
    weighted_margin = float(traj.final_weight @ snapshot.beta)
    return SupportVectorReport(
        by_weight=tuple(int(i) for i in by_weight),
        by_margin=tuple(int(i) for i in by_margin),
        agree=bool(np.array_equal(by_weight, by_margin)),
        weight_tol=weight_tol,
        margin_tol=margin_tol,
        min_margin=snapshot.min_margin,
        weighted_margin=weighted_margin,
        drift=abs(weighted_margin - snapshot.min_margin),
        positive_in_weight_set=int((labels[by_weight] == 1).sum()),
        negative_in_weight_set=int((labels[by_weight] == -1).sum()),
    )


@dataclass(frozen=True)
class CycleReport:
    """A detected cycle: first state in the buffer where it holds, and its period."""

    start_state: int
    period: int
    max_deviation: float
    forward_checked: bool


def _contiguous_states(traj: Trajectory):
    """Longest contiguous stored state block, preferring the run's tail."""
    if traj.tail_weights is not None and traj.tail_weights.shape[0] > 1:
        return traj.tail_start, traj.tail_weights
    states = traj.snapshot_states
    if states.shape[0] == 0:
        return None, None
    breaks = np.flatnonzero(np.diff(states) != 1)
    end = int(breaks[0]) + 1 if breaks.size else states.shape[0]
    return int(states[0]), traj.snapshot_weights[:end]


def detect_cycle(
    traj: Trajectory,
    matrix: DichotomyMatrix | None = None,
    tol: float = 1e-9,
    max_period: int = 100,
    tie_tol: float = 0.0,
) -> CycleReport | None:
    """Smallest sustained cycle in the stored tail of a run, if any.

    A period p qualifies when d(w_t, w_{t+p}) < tol holds over a window
    of at least 3p rounds ending at the last stored state and the
    selected-row sequence is p-periodic over that window. When a matrix
    is supplied the cycle is verified by replaying p rounds forward from
    the window start; a period failing the replay is rejected.

    Runs storing fewer than 4p + 1 consecutive states cannot confirm a
    period p, so store a tail (see run's tail_window) before calling.
    """
    if max_period < 1:
        raise ValueError(f"max_period must be >= 1, got {max_period}")
    start, W = _contiguous_states(traj)
    if W is None:
        return None
    K = W.shape[0]
    sel = traj.selected
    last = K - 1
    n_rounds = sel.shape[0]
    for p in range(1, max_period + 1):
        if K < 4 * p + 1:
            break
        lo = last - 4 * p  # window of 3p+1 state pairs
        # the rounds acting on paired states must also repeat with lag p;
        # round s acts on state s and exists for s <= n_rounds
        s_min = start + lo
        s_max = min(start + last - p, n_rounds - p)
        if s_max - s_min + 1 < 3 * p:
            continue
        if not np.array_equal(
            sel[s_min - 1 : s_max], sel[s_min - 1 + p : s_max + p]
        ):
            continue
        devs = np.abs(W[lo : last - p + 1] - W[lo + p : last + 1]).sum(axis=1)
        if not (devs < tol).all():
            continue
        # extend the window backwards while the cycle already held
        first = lo
        while first > 0:
            i = first - 1
            s = start + i
            if s + p <= n_rounds and sel[s - 1] != sel[s - 1 + p]:
                break
            if np.abs(W[i] - W[i + p]).sum() >= tol:
                break
            first = i
        max_dev = float(devs.max())
        forward_checked = False
        if matrix is not None:
            wv = W[first].copy()
            try:
                for step in range(p):
                    wv, _ = boost_step(
                        matrix, wv, t=start + first + step, tie_tol=tie_tol
                    )
            except BoostHalt:
                continue
            if float(np.abs(wv - W[first + p]).sum()) >= tol:
                continue
            forward_checked = True
        return CycleReport(
            start_state=start + first,
            period=p,
            max_deviation=max_dev,
            forward_checked=forward_checked,
        )
    return None


def ensemble_score(X, traj: Trajectory, representatives) -> np.ndarray:
    """Per-round-averaged vote score: sum of alpha-mass-weighted predictions / T.

    The sign is the ensemble's label; on training examples the score
    times the true label equals margin_numerator / T.
    """
    if traj.n_rounds == 0:
        raise ValueError("score undefined for an empty trajectory")
    X = np.asarray(X, dtype=np.float64)
    active = np.flatnonzero(traj.alpha_mass != 0.0)
    out = np.zeros(X.shape[0], dtype=np.float64)
    for r in active:
        out += traj.alpha_mass[r] * representatives[r].predict(X).astype(np.float64)
    return out / traj.n_rounds


@dataclass(frozen=True)
class TestErrorCurve:
    """Held-out error of the voted ensemble at checkpoints.

    A zero score is counted as an error (the ensemble abstained), and
    the number of zero scores is reported per checkpoint.
    """

    checkpoints: np.ndarray
    error: np.ndarray
    zero_scores: np.ndarray


def default_checkpoints(n_rounds: int, points: int = 200) -> np.ndarray:
    """Log-spaced round checkpoints from 1 to n_rounds."""
    if n_rounds < 1:
        raise ValueError(f"need n_rounds >= 1, got {n_rounds}")
    grid = np.unique(
        np.round(np.geomspace(1, n_rounds, min(points, n_rounds))).astype(np.int64)
    )
    return grid


def test_error_curve(
    traj: Trajectory, representatives, test_ds, checkpoints=None
) -> TestErrorCurve:
    """Evaluate the voted ensemble on held-out data as the run progressed."""
    if test_ds.m == 0:
        raise ValueError("test set is empty")
    if traj.n_rounds == 0:
        raise ValueError("cannot evaluate an empty trajectory")
    if checkpoints is None:
        checkpoints = default_checkpoints(traj.n_rounds)
    cps = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if cps.size == 0 or cps[0] < 1 or cps[-1] > traj.n_rounds:
        raise ValueError("checkpoints must lie in 1..n_rounds")
    n = traj.selection_count.shape[0]
    preds = np.stack(
        [h.predict(test_ds.features).astype(np.float64) for h in representatives]
    )
    y = test_ds.labels.astype(np.float64)
    scores = np.zeros(test_ds.m, dtype=np.float64)
    errors = np.empty(cps.shape[0], dtype=np.float64)
    zeros = np.empty(cps.shape[0], dtype=np.int64)
    prev = 0
    for j, cp in enumerate(cps):
        mass = np.bincount(
            traj.selected[prev:cp], weights=traj.alpha[prev:cp], minlength=n
        )
        scores += mass @ preds
        correct = (np.sign(scores) == y) & (scores != 0.0)
        errors[j] = 1.0 - float(correct.mean())
        zeros[j] = int((scores == 0.0).sum())
        prev = int(cp)
    return TestErrorCurve(cps, errors, zeros)
