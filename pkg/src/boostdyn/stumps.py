"""Decision stumps and the dichotomy matrix they induce on a training set.

A hypothesis is reduced to the 0/1 row of examples it misclassifies.
Boosting dynamics only ever see these rows, so hypotheses with equal
rows are collapsed to one representative and rows that misclassify a
strict superset of another row's examples are dropped (they can never
achieve a lower weighted error).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_bit_row, check_weight_vector
from .dataset import Dataset


class PerfectHypothesisError(ValueError):
    """A hypothesis classifies every training example correctly.

    Boosting weights are undefined in this case (the weight update
    divides by the weighted error), so the caller must be told instead.
    """

    def __init__(self, hypothesis):
        self.hypothesis = hypothesis
        super().__init__(
            f"hypothesis {hypothesis} is perfect on the training set; "
            "boosting is undefined, use it directly"
        )


class EmptyHypothesisSpaceError(ValueError):
    """No stump can be built (every feature is constant)."""


@dataclass(frozen=True)
class Stump:
    """Axis-aligned threshold classifier.

    Predicts `polarity` when x[feature] > threshold and -polarity otherwise.
    """

    feature: int
    threshold: float
    polarity: int

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        above = X[:, self.feature] > self.threshold
        return np.where(above, self.polarity, -self.polarity).astype(np.int8)


@dataclass(frozen=True)
class ConstantStump:
    """Predicts the same label everywhere. Excluded from enumeration by default."""

    polarity: int

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X)
        return np.full(X.shape[0], self.polarity, dtype=np.int8)


def enumerate_stumps(ds: Dataset, include_constant: bool = False) -> list:
    """All decision stumps over the dataset, in deterministic order.

    Thresholds sit at midpoints of consecutive distinct sorted feature
    values, so a feature with k distinct values yields 2*(k-1) stumps
    (both polarities). Order: feature index, then threshold ascending,
    then polarity +1 before -1. Constant hypotheses are appended last
    when requested.
    """
    stumps: list = []
    for j in range(ds.d):
        values = np.unique(ds.features[:, j])
        for lo, hi in zip(values[:-1], values[1:]):
            thr = float((lo + hi) / 2.0)
            stumps.append(Stump(j, thr, 1))
            stumps.append(Stump(j, thr, -1))
    if include_constant:
        stumps.append(ConstantStump(1))
        stumps.append(ConstantStump(-1))
    if not stumps:
        raise EmptyHypothesisSpaceError(
            "every feature is constant; no threshold stump exists"
        )
    return stumps


def dichotomy_of(hypothesis, ds: Dataset) -> np.ndarray:
    """Misclassification bits of a hypothesis: 1 where prediction != label."""
    pred = hypothesis.predict(ds.features)
    return (pred != ds.labels).astype(np.uint8)


@dataclass(frozen=True)
class DichotomyMatrix:
    """Distinct misclassification rows with one representative hypothesis each.

    rows[i, j] == 1 means representative i misclassifies example j.
    """

    rows: np.ndarray
    representatives: tuple | None = field(default=None)

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim != 2:
            raise ValueError(f"rows must be 2-d, got shape {rows.shape}")
        if ((rows != 0) & (rows != 1)).any():
            raise ValueError("rows must contain only 0/1 bits")
        rows = rows.astype(np.uint8).copy()
        seen = set()
        for bits in rows:
            key = bits.tobytes()
            if key in seen:
                raise ValueError("duplicate dichotomy rows")
            seen.add(key)
        if self.representatives is not None:
            reps = tuple(self.representatives)
            if len(reps) != rows.shape[0]:
                raise ValueError(
                    f"{len(reps)} representatives for {rows.shape[0]} rows"
                )
            object.__setattr__(self, "representatives", reps)
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        # float copy for BLAS matvecs in the hot loop
        rows_f = rows.astype(np.float64)
        rows_f.flags.writeable = False
        object.__setattr__(self, "_rows_f64", rows_f)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def m(self) -> int:
        return self.rows.shape[1]

    @property
    def rows_f64(self) -> np.ndarray:
        return self._rows_f64

    def errors(self, w: np.ndarray) -> np.ndarray:
        """Weighted error of every row at weight vector w."""
        return self._rows_f64 @ np.asarray(w, dtype=np.float64)


def build_matrix(ds: Dataset, stumps) -> DichotomyMatrix:
    """Dichotomy matrix of a hypothesis list: dedup, then prune dominated rows.

    The representative of a row is the first hypothesis in enumeration
    order that produced it. A hypothesis misclassifying nothing raises
    PerfectHypothesisError; the row misclassifying everything is dropped
    (its complement always has lower error). Deterministic: the same
    dataset and hypothesis list give a bit-identical matrix.
    """
    if not stumps:
        raise EmptyHypothesisSpaceError("no hypotheses supplied")
    X = ds.features
    y = ds.labels
    first: dict[bytes, int] = {}
    kept_rows: list[np.ndarray] = []
    kept_reps: list = []
    for h in stumps:
        bits = (h.predict(X) != y).astype(np.uint8)
        total = int(bits.sum())
        if total == 0:
            raise PerfectHypothesisError(h)
        if total == ds.m:
            continue
        key = bits.tobytes()
        if key not in first:
            first[key] = len(kept_rows)
            kept_rows.append(bits)
            kept_reps.append(h)
    if not kept_rows:
        raise EmptyHypothesisSpaceError("every hypothesis misclassifies all examples")
    matrix = DichotomyMatrix(np.array(kept_rows), tuple(kept_reps))
    return prune(matrix)


def prune(matrix: DichotomyMatrix) -> DichotomyMatrix:
    """Drop rows whose misclassified set strictly contains another row's.

    Such rows have weighted error >= the contained row at every weight
    vector, so they can never be selected ahead of it. The surviving set
    is unique, hence removal order does not matter; input row order is
    preserved among survivors.
    """
    R = matrix.rows_f64
    # over[a, b] = number of examples misclassified by a but not b
    over = R @ (1.0 - R.T)
    superset_of = over.T == 0  # superset_of[a, b]: row a's set contains row b's
    # distinct rows make containment strict, so any hit dominates row a
    dominated = (superset_of & ~np.eye(matrix.n, dtype=bool)).any(axis=1)
    keep = np.flatnonzero(~dominated)
    reps = matrix.representatives
    return DichotomyMatrix(
        matrix.rows[keep],
        tuple(reps[i] for i in keep) if reps is not None else None,
    )


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # lower root survives so class labels follow the lowest index
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


class EquivalenceTracker:
    """Groups rows that are indistinguishable at weight resolution eps.

    Rows a and b are equivalent when the total weight of examples they
    disagree on is below eps; classes are the transitive closure. Two
    rows disagreeing on any single coordinate with weight >= eps can
    never be equivalent, so rows are first grouped by their bit pattern
    on those heavy coordinates (recomputed only when the heavy set
    changes) and only groups are refined against the exact pairwise
    rule. With eps <= 0 every row is its own class.
    """

    def __init__(self, rows: np.ndarray, eps: float):
        self.rows = np.asarray(rows, dtype=np.uint8)
        self.eps = float(eps)
        self.n = self.rows.shape[0]
        self._heavy: np.ndarray | None = None
        self._group_cls: np.ndarray | None = None
        self._multi_groups: list[np.ndarray] = []

    def _regroup(self, heavy: np.ndarray) -> None:
        self._heavy = heavy.copy()
        sub = self.rows[:, heavy]
        first: dict[bytes, int] = {}
        cls = np.empty(self.n, dtype=np.intp)
        members: dict[int, list[int]] = {}
        for i in range(self.n):
            key = sub[i].tobytes()
            root = first.setdefault(key, i)
            cls[i] = root
            members.setdefault(root, []).append(i)
        self._group_cls = cls
        self._multi_groups = [
            np.array(v, dtype=np.intp) for v in members.values() if len(v) > 1
        ]

    def classes(self, w: np.ndarray) -> np.ndarray:
        """Class label per row (label = lowest row index in the class)."""
        if self.eps <= 0.0:
            return np.arange(self.n, dtype=np.intp)
        heavy = w >= self.eps
        if self._heavy is None or not np.array_equal(heavy, self._heavy):
            self._regroup(heavy)
        if not self._multi_groups:
            return self._group_cls
        light_mass = float(w[~heavy].sum())
        if light_mass < self.eps:
            # within a group rows differ only on light coordinates, whose
            # total mass is already below eps: the whole group collapses
            return self._group_cls
        cls = np.arange(self.n, dtype=np.intp)
        light = ~heavy
        wl = w[light]
        for idx in self._multi_groups:
            sub = self.rows[np.ix_(idx, np.flatnonzero(light))].astype(np.float64)
            masses = sub @ wl
            cross = sub @ (wl * sub).T
            diff = masses[:, None] + masses[None, :] - 2.0 * cross
            uf = _UnionFind(len(idx))
            for a in range(len(idx)):
                for b in range(a + 1, len(idx)):
                    if diff[a, b] < self.eps:
                        uf.union(a, b)
            for a in range(len(idx)):
                cls[idx[a]] = idx[uf.find(a)]
        return cls


@dataclass(frozen=True)
class MergeReport:
    """Outcome of an equivalence merge: classes with 2+ members and the total removed."""

    classes: tuple[tuple[int, tuple[int, ...]], ...]
    merged_away: int


def merge_equivalent(
    matrix: DichotomyMatrix, w, eps: float
) -> tuple[DichotomyMatrix, MergeReport]:
    """Collapse rows indistinguishable at weight resolution eps.

    Rows whose disagreement carries total weight below eps (transitive
    closure) keep only the lowest-index member. eps <= 0 merges nothing.
    """
    w = check_weight_vector(w)
    if w.shape[0] != matrix.m:
        raise ValueError(f"weight length {w.shape[0]} != matrix width {matrix.m}")
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    cls = EquivalenceTracker(matrix.rows, eps).classes(w)
    survivors = np.unique(cls)
    classes = []
    for s in survivors:
        members = np.flatnonzero(cls == s)
        if len(members) > 1:
            classes.append((int(s), tuple(int(i) for i in members if i != s)))
    reps = matrix.representatives
    merged = DichotomyMatrix(
        matrix.rows[survivors],
        tuple(reps[i] for i in survivors) if reps is not None else None,
    )
    report = MergeReport(tuple(classes), matrix.n - len(survivors))
    return merged, report


def hypothesis_to_json(h) -> dict:
    if isinstance(h, Stump):
        return {
            "kind": "stump",
            "feature": h.feature,
            "threshold": h.threshold,
            "polarity": h.polarity,
        }
    if isinstance(h, ConstantStump):
        return {"kind": "constant", "polarity": h.polarity}
    raise TypeError(f"cannot serialize hypothesis of type {type(h).__name__}")


def hypothesis_from_json(obj: dict):
    if obj["kind"] == "stump":
        return Stump(int(obj["feature"]), float(obj["threshold"]), int(obj["polarity"]))
    if obj["kind"] == "constant":
        return ConstantStump(int(obj["polarity"]))
    raise ValueError(f"unknown hypothesis kind {obj['kind']!r}")


def dump_matrix(matrix: DichotomyMatrix, csv_path, json_path) -> None:
    """Write rows as CSV bits plus a JSON sidecar of representatives."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", *(f"e{j}" for j in range(matrix.m))])
        for i in range(matrix.n):
            writer.writerow([i, *(int(b) for b in matrix.rows[i])])
    if matrix.representatives is None:
        raise ValueError("matrix has no representatives to dump")
    payload = [hypothesis_to_json(h) for h in matrix.representatives]
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
