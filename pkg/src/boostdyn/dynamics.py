"""Boosting with the exact minimum-error weak learner, run as an iterated map.

State is the example-weight vector w on the probability simplex. Each
round selects the dichotomy row with minimum weighted error (lowest row
index on ties), then rescales so the misclassified examples carry
exactly half the mass:

    w'(i) = (1/2) * w(i) / err        if row misclassifies i
    w'(i) = (1/2) * w(i) / (1 - err)  otherwise

The update is deterministic, so a run is fully reproducible from the
matrix and the initial weight vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_bit_row, check_weight_vector
from .stumps import DichotomyMatrix, EquivalenceTracker

# halt threshold for "no weak learning": selected error above 1/2 - this
NO_WEAK_LEARNING_TOL = 1e-12

COMPLETED = "completed"
ZERO_ERROR = "zero_error"
NO_WEAK_LEARNING = "no_weak_learning"
NUMERIC_FAILURE = "numeric_failure"


@dataclass(frozen=True)
class HaltReason:
    """Why a run stopped: kind, the round it stopped at, offending row if any."""

    kind: str
    at_round: int | None = None
    row: int | None = None

    @property
    def completed(self) -> bool:
        return self.kind == COMPLETED


class BoostHalt(Exception):
    """Raised by a single step when the dynamics cannot continue."""

    def __init__(self, reason: HaltReason):
        self.reason = reason
        super().__init__(f"{reason.kind} at round {reason.at_round}")


@dataclass(frozen=True)
class RoundRecord:
    """Everything observed in one round, before and after its update."""

    t: int
    selected_row: int
    eps: float
    alpha: float
    tie_count: int
    tie_gap: float
    merged_away: int
    min_row_error: float


def weighted_error(row, w) -> float:
    """Total weight of the examples a row misclassifies."""
    row = check_bit_row(row)
    w = check_weight_vector(w, tol=np.inf)
    if row.shape != w.shape:
        raise ValueError(f"row length {row.shape[0]} != weight length {w.shape[0]}")
    return float(row.astype(np.float64) @ w)


def select_row(matrix: DichotomyMatrix, w, tie_tol: float = 0.0):
    """Minimum-error row with lowest-index tie break.

    Returns (index, tie indices) where ties collects every row within
    tie_tol of the minimum. The default tie_tol of 0 means exact 64-bit
    equality.
    """
    if tie_tol < 0:
        raise ValueError(f"tie_tol must be >= 0, got {tie_tol}")
    errs = matrix.errors(np.asarray(w, dtype=np.float64))
    ties = np.flatnonzero(errs <= errs.min() + tie_tol)
    return int(ties[0]), ties


def vote_weight(eps: float) -> float:
    """Hypothesis vote alpha = (1/2) ln((1-eps)/eps); requires 0 < eps < 1/2."""
    if not 0.0 < eps < 0.5:
        raise ValueError(f"vote weight needs error in (0, 1/2), got {eps}")
    return 0.5 * math.log((1.0 - eps) / eps)


def update_weights(row, w) -> np.ndarray:
    """Rescale w so the row's misclassified examples carry half the mass.

    Defined for 0 < weighted error < 1. The output sums to 1 exactly up
    to rounding; it is renormalized to absorb that rounding.
    """
    row = check_bit_row(row)
    w = check_weight_vector(w)
    if row.shape != w.shape:
        raise ValueError(f"row length {row.shape[0]} != weight length {w.shape[0]}")
    eps = float(row.astype(np.float64) @ w)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"update undefined at weighted error {eps}")
    out = w * np.where(row == 1, 0.5 / eps, 0.5 / (1.0 - eps))
    return out / out.sum()


def uniform_weight(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    return np.full(m, 1.0 / m, dtype=np.float64)


def random_simplex_weight(m: int, seed: int) -> np.ndarray:
    """Uniform draw from the simplex: unit-rate exponentials, normalized."""
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    e = np.random.default_rng(seed).standard_exponential(m)
    return e / e.sum()


def initial_weight(m: int, mode: str = "uniform", seed: int | None = None) -> np.ndarray:
    if mode == "uniform":
        return uniform_weight(m)
    if mode == "random_simplex":
        if seed is None:
            raise ValueError("random_simplex initialization requires a seed")
        return random_simplex_weight(m, seed)
    raise ValueError(f"unknown initialization mode {mode!r}")


def default_snapshot_states(n_rounds: int, dense_until: int = 1000, ratio: float = 1.05):
    """States to store: every state up to dense_until, then geometric, plus the last."""
    last = n_rounds + 1
    states = list(range(1, min(dense_until, last) + 1))
    t = float(states[-1]) if states else 1.0
    while states[-1] < last:
        t = max(t * ratio, states[-1] + 1.0)
        states.append(min(int(t), last))
    return np.array(states, dtype=np.int64)


@dataclass
class Trajectory:
    """Complete record of a run.

    Round arrays are aligned: entry t-1 describes round t, which acted on
    state w_t and produced w_{t+1}. Weight states are stored on the
    snapshot schedule; `final_weight` is the last state reached.
    """

    initial_weight: np.ndarray
    final_weight: np.ndarray
    selected: np.ndarray
    eps: np.ndarray
    alpha: np.ndarray
    tie_count: np.ndarray
    tie_gap: np.ndarray
    merged_away: np.ndarray
    min_row_error: np.ndarray
    margin_numerator: np.ndarray
    alpha_sum: float
    selection_count: np.ndarray
    alpha_mass: np.ndarray
    snapshot_states: np.ndarray
    snapshot_weights: np.ndarray
    tail_start: int | None = None
    tail_weights: np.ndarray | None = None
    max_sum_deviation: float = 0.0
    max_half_error_deviation: float = 0.0
    min_weight_seen: float = math.inf
    running_min_error: float = math.inf
    _state_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._state_index = {
            int(t): i for i, t in enumerate(self.snapshot_states)
        }

    @property
    def n_rounds(self) -> int:
        return int(self.selected.shape[0])

    @property
    def m(self) -> int:
        return int(self.initial_weight.shape[0])

    def round(self, t: int) -> RoundRecord:
        """Record of round t (1-based)."""
        if not 1 <= t <= self.n_rounds:
            raise IndexError(f"round {t} outside 1..{self.n_rounds}")
        i = t - 1
        return RoundRecord(
            t=t,
            selected_row=int(self.selected[i]),
            eps=float(self.eps[i]),
            alpha=float(self.alpha[i]),
            tie_count=int(self.tie_count[i]),
            tie_gap=float(self.tie_gap[i]),
            merged_away=int(self.merged_away[i]),
            min_row_error=float(self.min_row_error[i]),
        )

    def has_state(self, t: int) -> bool:
        return t in self._state_index

    def state(self, t: int) -> np.ndarray:
        """Stored weight state w_t; raises KeyError if t was not snapshotted."""
        return self.snapshot_weights[self._state_index[t]]


def _finish_round(record_arrays, i, k, e, a, ties, gap, merged, min_err):
    sel, eps_a, alpha_a, tcount, tgap, maway, minerr = record_arrays
    sel[i] = k
    eps_a[i] = e
    alpha_a[i] = a
    tcount[i] = ties
    tgap[i] = gap
    maway[i] = merged
    minerr[i] = min_err


def run(
    matrix: DichotomyMatrix,
    w1,
    n_rounds: int,
    *,
    tie_tol: float = 0.0,
    equivalence_eps: float = 0.0,
    snapshot_states=None,
    tail_window: int = 0,
    hooks=(),
) -> tuple[Trajectory, HaltReason]:
    """Iterate the boosting map for n_rounds from state w1.

    Each round records the selected row, its error and vote weight, the
    tie count at tie_tol, and the tie gap to the nearest row that is not
    equivalent to the winner at resolution equivalence_eps (the gap is
    inf when every other row is equivalent). Weight states are stored on
    `snapshot_states` (default: dense to state 1000, then geometric) and,
    when tail_window > 0, for the last tail_window states. Hooks are
    called as hook(state, w) at every stored state.

    Halts early with reason zero_error (some row has weighted error 0),
    no_weak_learning (best error above 1/2 - 1e-12), or numeric_failure;
    the trajectory then covers the completed rounds only.
    """
    if n_rounds < 0:
        raise ValueError(f"n_rounds must be >= 0, got {n_rounds}")
    w = check_weight_vector(w1).copy()
    if w.shape[0] != matrix.m:
        raise ValueError(f"weight length {w.shape[0]} != matrix width {matrix.m}")
    if tie_tol < 0:
        raise ValueError(f"tie_tol must be >= 0, got {tie_tol}")

    R = matrix.rows_f64
    rows_u8 = matrix.rows
    n, m = matrix.n, matrix.m
    T = int(n_rounds)

    sel = np.zeros(T, dtype=np.int64)
    eps_a = np.zeros(T, dtype=np.float64)
    alpha_a = np.zeros(T, dtype=np.float64)
    tcount = np.zeros(T, dtype=np.int64)
    tgap = np.zeros(T, dtype=np.float64)
    maway = np.zeros(T, dtype=np.int64)
    minerr = np.zeros(T, dtype=np.float64)
    record_arrays = (sel, eps_a, alpha_a, tcount, tgap, maway, minerr)

    margin_num = np.zeros(m, dtype=np.float64)
    count = np.zeros(n, dtype=np.int64)
    mass = np.zeros(n, dtype=np.float64)

    if snapshot_states is None:
        snapshot_states = default_snapshot_states(T)
    snap_set = {int(t) for t in np.asarray(snapshot_states).ravel()}
    snaps: list[tuple[int, np.ndarray]] = []
    tail: list[tuple[int, np.ndarray]] = []

    tracker = EquivalenceTracker(rows_u8, equivalence_eps) if equivalence_eps > 0 else None

    max_sum_dev = 0.0
    max_half_dev = 0.0
    min_weight = float(w.min())
    running_min = math.inf
    halt = HaltReason(COMPLETED)

    def _observe(state_t: int, vec: np.ndarray) -> None:
        if state_t in snap_set:
            stored = vec.copy()
            snaps.append((state_t, stored))
            for hook in hooks:
                hook(state_t, stored)
        if tail_window > 0:
            tail.append((state_t, vec.copy()))
            if len(tail) > tail_window:
                tail.pop(0)

    _observe(1, w)
    done = 0
    for t in range(1, T + 1):
        errs = R @ w
        min_err = float(errs.min())
        if tie_tol > 0.0:
            ties = np.flatnonzero(errs <= min_err + tie_tol)
            k = int(ties[0])
            n_ties = int(ties.shape[0])
        else:
            k = int(np.argmin(errs))
            n_ties = int((errs == min_err).sum())
        e = float(errs[k])
        running_min = min(running_min, min_err)

        if min_err <= 0.0:
            halt = HaltReason(ZERO_ERROR, at_round=t, row=int(np.argmin(errs)))
            break
        if e > 0.5 - NO_WEAK_LEARNING_TOL:
            halt = HaltReason(NO_WEAK_LEARNING, at_round=t, row=k)
            break

        a = 0.5 * math.log((1.0 - e) / e)

        if tracker is not None:
            cls = tracker.classes(w)
            merged = n - len(np.unique(cls))
            outside = cls != cls[k]
            gap = float(errs[outside].min() - min_err) if outside.any() else math.inf
        else:
            merged = 0
            gap = float(np.partition(errs, 1)[1] - min_err) if n > 1 else math.inf

        row = rows_u8[k]
        rowf = R[k]
        margin_num += a * (1.0 - 2.0 * rowf)
        count[k] += 1
        mass[k] += a

        w_new = w * np.where(row == 1, 0.5 / e, 0.5 / (1.0 - e))
        total = float(w_new.sum())
        if not math.isfinite(total) or total <= 0.0:
            halt = HaltReason(NUMERIC_FAILURE, at_round=t, row=k)
            break
        w_new /= total

        _finish_round(record_arrays, t - 1, k, e, a, n_ties, gap, merged, min_err)
        done = t

        max_sum_dev = max(max_sum_dev, abs(float(w_new.sum()) - 1.0))
        max_half_dev = max(max_half_dev, abs(float(rowf @ w_new) - 0.5))
        min_weight = min(min_weight, float(w_new.min()))

        w = w_new
        _observe(t + 1, w)

    if done < T:
        sel, eps_a, alpha_a, tcount, tgap, maway, minerr = (
            arr[:done] for arr in record_arrays
        )

    snap_states = np.array([s for s, _ in snaps], dtype=np.int64)
    snap_weights = (
        np.array([v for _, v in snaps]) if snaps else np.zeros((0, m))
    )
    tail_start = tail[0][0] if tail else None
    tail_weights = np.array([v for _, v in tail]) if tail else None

    traj = Trajectory(
        initial_weight=check_weight_vector(w1).copy(),
        final_weight=w.copy(),
        selected=sel,
        eps=eps_a,
        alpha=alpha_a,
        tie_count=tcount,
        tie_gap=tgap,
        merged_away=maway,
        min_row_error=minerr,
        margin_numerator=margin_num,
        alpha_sum=float(alpha_a.sum()),
        selection_count=count,
        alpha_mass=mass,
        snapshot_states=snap_states,
        snapshot_weights=snap_weights,
        tail_start=tail_start,
        tail_weights=tail_weights,
        max_sum_deviation=max_sum_dev,
        max_half_error_deviation=max_half_dev,
        min_weight_seen=min_weight,
        running_min_error=running_min,
    )
    return traj, halt


def boost_step(
    matrix: DichotomyMatrix,
    w,
    t: int = 1,
    *,
    tie_tol: float = 0.0,
    equivalence_eps: float = 0.0,
) -> tuple[np.ndarray, RoundRecord]:
    """One full round: select, record, update. Raises BoostHalt when stuck."""
    w = check_weight_vector(w)
    if w.shape[0] != matrix.m:
        raise ValueError(f"weight length {w.shape[0]} != matrix width {matrix.m}")
    errs = matrix.errors(w)
    min_err = float(errs.min())
    k, ties = select_row(matrix, w, tie_tol)
    e = float(errs[k])
    if min_err <= 0.0:
        raise BoostHalt(HaltReason(ZERO_ERROR, at_round=t, row=int(np.argmin(errs))))
    if e > 0.5 - NO_WEAK_LEARNING_TOL:
        raise BoostHalt(HaltReason(NO_WEAK_LEARNING, at_round=t, row=k))
    a = vote_weight(e)
    if equivalence_eps > 0:
        cls = EquivalenceTracker(matrix.rows, equivalence_eps).classes(w)
        merged = matrix.n - len(np.unique(cls))
        outside = cls != cls[k]
        gap = float(errs[outside].min() - min_err) if outside.any() else math.inf
    else:
        merged = 0
        gap = (
            float(np.partition(errs, 1)[1] - min_err) if matrix.n > 1 else math.inf
        )
    w_new = update_weights(matrix.rows[k], w)
    if not np.isfinite(w_new).all():
        raise BoostHalt(HaltReason(NUMERIC_FAILURE, at_round=t, row=k))
    record = RoundRecord(
        t=t,
        selected_row=k,
        eps=e,
        alpha=a,
        tie_count=int(ties.shape[0]),
        tie_gap=gap,
        merged_away=merged,
        min_row_error=min_err,
    )
    return w_new, record
