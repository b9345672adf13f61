"""Inverse geometry of the boosting map.

A state w can only be reached through a row whose weighted error at w is
exactly one half (the update forces this). The preimages through such a
row form a line segment parameterized by rho in [0, 1]:

    point(rho) = 2 rho * (w restricted to the row's errors)
               + 2 (1 - rho) * (w restricted to the rest)

and rho equals the row's weighted error at that point. Restricting a
segment to the region where its row actually wins selection (minimum
error, lowest index on ties) yields the exact preimage set of the map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_bit_row, check_weight_vector
from .stumps import DichotomyMatrix

# membership tolerance for "weighted error is one half"
HALF_ERROR_TOL = 1e-10


def d_distance(w1, w2) -> float:
    """L1 distance between weight vectors, the natural metric here."""
    a = np.asarray(w1, dtype=np.float64)
    b = np.asarray(w2, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


def decompose(w, row) -> tuple[np.ndarray, np.ndarray]:
    """Split w into (mass on the row's errors, mass on the rest)."""
    row = check_bit_row(row)
    w = check_weight_vector(w, tol=np.inf)
    if row.shape != w.shape:
        raise ValueError(f"row length {row.shape[0]} != weight length {w.shape[0]}")
    miss = w * row
    return miss, w - miss


@dataclass(frozen=True)
class RhoInterval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and (self.lo_open or self.hi_open)

    def contains(self, rho: float) -> bool:
        if rho < self.lo or rho > self.hi:
            return False
        if rho == self.lo and self.lo_open:
            return False
        if rho == self.hi and self.hi_open:
            return False
        return True

    def interior_points(self, k: int) -> np.ndarray:
        """k points strictly inside the interval, evenly spread."""
        offsets = (np.arange(k) + 0.5) / k
        return self.lo + (self.hi - self.lo) * offsets


@dataclass(frozen=True)
class SegmentPreimage:
    """One preimage segment of a state through a given row."""

    row_index: int
    row: np.ndarray
    miss_part: np.ndarray
    hit_part: np.ndarray
    interval: RhoInterval

    def point(self, rho: float) -> np.ndarray:
        """Preimage at parameter rho; the row's error there equals rho."""
        return 2.0 * rho * self.miss_part + 2.0 * (1.0 - rho) * self.hit_part

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.point(self.interval.lo), self.point(self.interval.hi)


def row_preimage(row, w, row_index: int = -1) -> SegmentPreimage | None:
    """Preimage segment of w through one row, or None.

    Exists only when the row's weighted error at w is 1/2 (within
    HALF_ERROR_TOL). The full interval [0, 1] is returned; the endpoint
    parameters 0 and 1 are preimages only in the closure sense since the
    forward update divides by the error and its complement.
    """
    row = check_bit_row(row)
    w = check_weight_vector(w)
    err = float(row.astype(np.float64) @ w)
    if abs(err - 0.5) > HALF_ERROR_TOL:
        return None
    miss, hit = decompose(w, row)
    return SegmentPreimage(row_index, row, miss, hit, RhoInterval(0.0, 1.0))


def error_along(other_row, segment: SegmentPreimage) -> tuple[float, float]:
    """Weighted error of another row along the segment, as (slope, intercept).

    err(rho) = slope * rho + intercept. For the segment's own row this is
    (1, 0) up to rounding.
    """
    other = check_bit_row(other_row, segment.row.shape[0]).astype(np.float64)
    slope = 2.0 * float(other @ segment.miss_part - other @ segment.hit_part)
    intercept = 2.0 * float(other @ segment.hit_part)
    return slope, intercept


def _clip_to_selection(
    k: int, slopes: np.ndarray, intercepts: np.ndarray
) -> RhoInterval | None:
    """Restrict rho to where row k wins selection against every other row.

    Row k wins at rho when its error is strictly below every lower-index
    row's and at most every higher-index row's. Each comparison is a
    linear inequality in rho. The base interval is open (0, 1): at 0 the
    row's error vanishes and at 1 its complement's does, and the forward
    update is undefined at both.
    """
    lo, lo_open = 0.0, True
    hi, hi_open = 1.0, True
    sk, ik = slopes[k], intercepts[k]
    for j in range(slopes.shape[0]):
        if j == k:
            continue
        strict = j < k
        denom = sk - slopes[j]
        rhs = intercepts[j] - ik
        if denom == 0.0:
            if rhs < 0.0 or (rhs == 0.0 and strict):
                return None
            continue
        bound = rhs / denom
        if denom > 0.0:
            if bound < hi:
                hi, hi_open = bound, strict
            elif bound == hi and strict:
                hi_open = True
        else:
            if bound > lo:
                lo, lo_open = bound, strict
            elif bound == lo and strict:
                lo_open = True
    interval = RhoInterval(lo, hi, lo_open, hi_open)
    return None if interval.empty else interval


def step_preimages(matrix: DichotomyMatrix, w) -> list[SegmentPreimage]:
    """All preimage segments of w under the full boosting map.

    One candidate segment per row at weighted error 1/2, each clipped to
    the region where that row wins selection and to rho > 0 (the forward
    map is undefined where the winning error vanishes). Segments are
    ordered by row index; the list is empty when w has no preimages.
    """
    w = check_weight_vector(w)
    if w.shape[0] != matrix.m:
        raise ValueError(f"weight length {w.shape[0]} != matrix width {matrix.m}")
    errs = matrix.errors(w)
    segments: list[SegmentPreimage] = []
    for k in np.flatnonzero(np.abs(errs - 0.5) <= HALF_ERROR_TOL):
        k = int(k)
        seg = row_preimage(matrix.rows[k], w, row_index=k)
        if seg is None:
            continue
        miss, hit = seg.miss_part, seg.hit_part
        slopes = 2.0 * (matrix.rows_f64 @ miss - matrix.rows_f64 @ hit)
        intercepts = 2.0 * (matrix.rows_f64 @ hit)
        interval = _clip_to_selection(k, slopes, intercepts)
        if interval is None:
            continue
        segments.append(
            SegmentPreimage(k, seg.row, miss, hit, interval)
        )
    return segments


@dataclass(frozen=True)
class RegionInfo:
    """Selection region membership of a state."""

    selected_row: int
    ties: tuple[int, ...]
    all_errors_positive: bool


def region_of(matrix: DichotomyMatrix, w, tie_tol: float = 0.0) -> RegionInfo:
    """Which row's selection region w lies in, and whether all errors are positive."""
    w = check_weight_vector(w)
    errs = matrix.errors(w)
    ties = np.flatnonzero(errs <= errs.min() + tie_tol)
    return RegionInfo(
        selected_row=int(ties[0]),
        ties=tuple(int(i) for i in ties),
        all_errors_positive=bool((errs > 0.0).all()),
    )


@dataclass(frozen=True)
class PreimageBoundReport:
    """Observed sharpness of the two-fold error bound on preimages."""

    points_checked: int
    max_ratio: float
    max_excess: float
    violations: tuple


def check_preimage_error_bound(
    matrix: DichotomyMatrix, w, samples: int = 100, tol: float = 1e-12
) -> PreimageBoundReport:
    """Verify err(row, w') <= 2 err(row, w) for sampled preimages w' of w.

    Every row's error can at most double in one backward step: a
    preimage splits w's mass into the 2 rho and 2 (1 - rho) scaled
    parts, so each row's error is a convex-ish combination bounded by
    twice its value at w. Samples are spread across all segments;
    violations beyond tol are collected rather than raised.
    """
    if samples < 1:
        raise ValueError(f"need samples >= 1, got {samples}")
    segments = step_preimages(matrix, w)
    if not segments:
        raise ValueError("state has no preimage segments to sample")
    w = check_weight_vector(w)
    base = matrix.errors(w)
    per_seg = max(1, math.ceil(samples / len(segments)))
    max_ratio = 0.0
    max_excess = -math.inf
    violations: list[tuple[int, float, int, float]] = []
    checked = 0
    for seg in segments:
        for rho in seg.interval.interior_points(per_seg):
            point = seg.point(float(rho))
            errs = matrix.errors(point)
            excess = errs - 2.0 * base
            max_excess = max(max_excess, float(excess.max()))
            positive = base > 0.0
            if positive.any():
                max_ratio = max(
                    max_ratio, float((errs[positive] / base[positive]).max())
                )
            for j in np.flatnonzero(excess > tol):
                violations.append((int(j), float(rho), seg.row_index, float(excess[j])))
            checked += 1
    return PreimageBoundReport(checked, max_ratio, max_excess, tuple(violations))


def segments_to_json(segments) -> list[dict]:
    """JSON-ready description: row, interval bounds and openness, endpoint vectors."""
    out = []
    for seg in segments:
        lo_point, hi_point = seg.endpoints
        out.append(
            {
                "row": seg.row_index,
                "interval": {
                    "lo": seg.interval.lo,
                    "hi": seg.interval.hi,
                    "lo_open": seg.interval.lo_open,
                    "hi_open": seg.interval.hi_open,
                },
                "endpoints": {
                    "lo": [float(v) for v in lo_point],
                    "hi": [float(v) for v in hi_point],
                },
            }
        )
    return out
