"""Reproducible experiment harness: JSON config in, fixed artifact set out.

A run directory contains:

    rounds.csv        per-round log (t, selected_row, eps_t, alpha_t,
                      tie_gap, merged_away, min_row_error)
    margins_T*.csv    margins per example at checkpoint rounds
    margin_hist_T*.csv  histogram of each margin snapshot
    test_error.csv    held-out error curve (only when a split is configured)
    diagnostics.csv   long-format diagnostics (run_id, T, metric, key, value)
    matrix.csv / representatives.json   optional matrix dump
    summary.json      halt reason, support vectors, frequencies, cycle
                      report, running minimum error, config hash

Outputs carry no timestamps and all floats use shortest round-trip
formatting, so rerunning a config yields byte-identical artifacts.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .dataset import Dataset, load_csv, require_both_labels, split
from .dynamics import HaltReason, ZERO_ERROR, default_snapshot_states, initial_weight, run
from .stumps import (
    PerfectHypothesisError,
    build_matrix,
    dump_matrix,
    enumerate_stumps,
    hypothesis_to_json,
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    output_dir: str
    rounds: int
    run_id: str = "run"
    label_column: str | int = "label"
    label_mapping: dict | None = None
    test_fraction: float | None = None
    split_seed: int = 0
    init: str = "uniform"
    init_seed: int | None = None
    tie_tol: float = 0.0
    equivalence_eps: float = 0.0
    include_constant: bool = False
    snapshot_dense_until: int = 1000
    snapshot_ratio: float = 1.05
    margin_checkpoints: tuple[int, ...] | None = None
    test_checkpoints: tuple[int, ...] | None = None
    cycle_max_period: int = 0
    cycle_tol: float = 1e-9
    sv_weight_tol: float = 1e-8
    sv_margin_tol: float = 1e-2
    dump_matrix: bool = False

    def __post_init__(self):
        if self.rounds < 1:
            raise ConfigError(f"rounds must be >= 1, got {self.rounds}")
        if self.init not in ("uniform", "random_simplex"):
            raise ConfigError(f"unknown init {self.init!r}")
        if self.init == "random_simplex" and self.init_seed is None:
            raise ConfigError("init 'random_simplex' requires init_seed")
        if self.test_fraction is not None and not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.tie_tol < 0 or self.equivalence_eps < 0:
            raise ConfigError("tie_tol and equivalence_eps must be >= 0")
        if self.cycle_max_period < 0:
            raise ConfigError("cycle_max_period must be >= 0")
        for name in ("margin_checkpoints", "test_checkpoints"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(int(v) for v in value))

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError(f"config must be a JSON object, got {type(obj).__name__}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"dataset", "output_dir", "rounds"} - set(obj)
        if missing:
            raise ConfigError(f"missing required config keys: {sorted(missing)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(obj)

    def canonical_json(self) -> str:
        obj = dataclasses.asdict(self)
        # the hash identifies the experiment, not where its files land
        del obj["output_dir"]
        for key in ("margin_checkpoints", "test_checkpoints"):
            if obj[key] is not None:
                obj[key] = list(obj[key])
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


@dataclass
class ExperimentResult:
    exit_code: int
    halt: HaltReason
    output_dir: str
    summary: dict
    trajectory: object | None = None


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _json_ready(value):
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _write_summary(path, summary: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_ready(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _default_margin_checkpoints(T: int) -> list[int]:
    cps = [10**k for k in range(1, 1 + int(math.log10(T))) if 10**k < T]
    cps.append(T)
    return cps


def _log_checkpoints(T: int, explicit, completed: int) -> np.ndarray:
    if explicit is not None:
        cps = [c for c in explicit if 1 <= c <= completed]
        return np.asarray(sorted(set(cps)), dtype=np.int64)
    return diagnostics.default_checkpoints(completed)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute one configured run and write its artifact directory."""
    out = config.output_dir
    os.makedirs(out, exist_ok=True)

    ds = load_csv(config.dataset, config.label_column, config.label_mapping)
    test_ds = None
    if config.test_fraction is not None:
        ds, test_ds = split(ds, config.test_fraction, config.split_seed)
    require_both_labels(ds)

    summary: dict = {
        "run_id": config.run_id,
        "config_hash": config.config_hash(),
        "train_examples": ds.m,
        "test_examples": test_ds.m if test_ds is not None else 0,
    }

    hypotheses = enumerate_stumps(ds, include_constant=config.include_constant)
    try:
        matrix = build_matrix(ds, hypotheses)
    except PerfectHypothesisError as exc:
        # boosting is undefined; report the perfect hypothesis and stop
        halt = HaltReason(ZERO_ERROR, at_round=0)
        summary["halt"] = {"kind": halt.kind, "at_round": 0, "row": None}
        summary["perfect_hypothesis"] = hypothesis_to_json(exc.hypothesis)
        _write_summary(os.path.join(out, "summary.json"), summary)
        return ExperimentResult(2, halt, out, summary)

    summary["matrix_rows"] = matrix.n
    if config.dump_matrix:
        dump_matrix(
            matrix,
            os.path.join(out, "matrix.csv"),
            os.path.join(out, "representatives.json"),
        )

    w1 = initial_weight(ds.m, config.init, config.init_seed)
    tail_window = 4 * config.cycle_max_period + 1 if config.cycle_max_period else 0
    traj, halt = run(
        matrix,
        w1,
        config.rounds,
        tie_tol=config.tie_tol,
        equivalence_eps=config.equivalence_eps,
        snapshot_states=default_snapshot_states(
            config.rounds, config.snapshot_dense_until, config.snapshot_ratio
        ),
        tail_window=tail_window,
    )
    T = traj.n_rounds

    _write_csv(
        os.path.join(out, "rounds.csv"),
        ["t", "selected_row", "eps_t", "alpha_t", "tie_gap", "merged_away", "min_row_error"],
        (
            (
                t + 1,
                int(traj.selected[t]),
                float(traj.eps[t]),
                float(traj.alpha[t]),
                float(traj.tie_gap[t]),
                int(traj.merged_away[t]),
                float(traj.min_row_error[t]),
            )
            for t in range(T)
        ),
    )

    summary["halt"] = {"kind": halt.kind, "at_round": halt.at_round, "row": halt.row}
    summary["rounds_completed"] = T
    summary["running_min_error"] = traj.running_min_error if T else None
    summary["audit"] = {
        "max_sum_deviation": traj.max_sum_deviation,
        "max_half_error_deviation": traj.max_half_error_deviation,
        "min_weight_seen": traj.min_weight_seen,
    }

    long_rows: list[tuple] = []
    if T >= 1:
        margin_cps = (
            [c for c in config.margin_checkpoints if 1 <= c <= T]
            if config.margin_checkpoints is not None
            else _default_margin_checkpoints(T)
        )
        if T not in margin_cps:
            margin_cps.append(T)
        snapshots = []
        for cp in sorted(set(margin_cps)):
            snap = diagnostics.margin_snapshot_at(traj, matrix, cp)
            snapshots.append(snap)
            _write_csv(
                os.path.join(out, f"margins_T{cp}.csv"),
                ["example", "beta"],
                ((i, float(b)) for i, b in enumerate(snap.beta)),
            )
            _write_csv(
                os.path.join(out, f"margin_hist_T{cp}.csv"),
                ["bin_lo", "bin_hi", "count"],
                (
                    (float(snap.bin_edges[j]), float(snap.bin_edges[j + 1]), int(c))
                    for j, c in enumerate(snap.histogram)
                ),
            )
        final_snap = snapshots[-1]
        for cp, mm in diagnostics.min_margin_trace(snapshots):
            long_rows.append((config.run_id, cp, "min_margin", "", mm))

        freqs = diagnostics.selection_frequencies(traj)
        for r in freqs.order:
            long_rows.append(
                (config.run_id, T, "selection_count_share", int(r), float(freqs.by_count[r]))
            )
            long_rows.append(
                (config.run_id, T, "selection_alpha_share", int(r), float(freqs.by_alpha[r]))
            )
        summary["selection_frequencies"] = [
            [int(r), float(freqs.by_count[r]), float(freqs.by_alpha[r])]
            for r in freqs.order
        ]

        unique_trace = diagnostics.unique_selection_trace(traj)
        trace_cps = _log_checkpoints(T, None, T)
        for cp in trace_cps:
            long_rows.append(
                (config.run_id, int(cp), "unique_rows", "", int(unique_trace[cp - 1]))
            )
        summary["unique_rows"] = [
            [int(cp), int(unique_trace[cp - 1])] for cp in trace_cps
        ]

        if T >= 2:
            eps_birkhoff = diagnostics.birkhoff_average(traj.eps)
            for cp, drift in zip(eps_birkhoff.checkpoints, eps_birkhoff.drift):
                long_rows.append(
                    (config.run_id, int(cp), "eps_running_mean_drift", "", float(drift))
                )

        sv = diagnostics.support_vectors(
            traj,
            final_snap,
            ds.labels,
            weight_tol=config.sv_weight_tol,
            margin_tol=config.sv_margin_tol,
        )
        summary["support_vectors"] = {
            "by_weight": list(sv.by_weight),
            "by_margin": list(sv.by_margin),
            "agree": sv.agree,
            "min_margin": sv.min_margin,
            "weighted_margin": sv.weighted_margin,
            "drift": sv.drift,
            "positive_in_weight_set": sv.positive_in_weight_set,
            "negative_in_weight_set": sv.negative_in_weight_set,
        }

        if config.cycle_max_period:
            report = diagnostics.detect_cycle(
                traj,
                matrix,
                tol=config.cycle_tol,
                max_period=config.cycle_max_period,
                tie_tol=config.tie_tol,
            )
            summary["cycle"] = (
                None
                if report is None
                else {
                    "start_state": report.start_state,
                    "period": report.period,
                    "max_deviation": report.max_deviation,
                    "forward_checked": report.forward_checked,
                }
            )

        if test_ds is not None:
            curve = diagnostics.test_error_curve(
                traj,
                matrix.representatives,
                test_ds,
                _log_checkpoints(T, config.test_checkpoints, T),
            )
            _write_csv(
                os.path.join(out, "test_error.csv"),
                ["T", "test_error", "zero_scores"],
                (
                    (int(t), float(e), int(z))
                    for t, e, z in zip(curve.checkpoints, curve.error, curve.zero_scores)
                ),
            )
            summary["final_test_error"] = float(curve.error[-1])

    _write_csv(
        os.path.join(out, "diagnostics.csv"),
        ["run_id", "T", "metric", "key", "value"],
        long_rows,
    )
    _write_summary(os.path.join(out, "summary.json"), summary)
    exit_code = 0 if halt.completed else 2
    return ExperimentResult(exit_code, halt, out, summary, traj)


def inspect_dir(path) -> str:
    """Human-readable digest of a run directory's summary.json."""
    summary_path = os.path.join(path, "summary.json")
    with open(summary_path, encoding="utf-8") as fh:
        summary = json.load(fh)
    lines = [f"run {summary.get('run_id', '?')} in {path}"]
    halt = summary.get("halt", {})
    lines.append(
        f"  halt: {halt.get('kind', '?')}"
        + (f" at round {halt['at_round']}" if halt.get("at_round") else "")
    )
    if "perfect_hypothesis" in summary:
        lines.append(f"  perfect hypothesis: {summary['perfect_hypothesis']}")
    if "rounds_completed" in summary:
        lines.append(f"  rounds completed: {summary['rounds_completed']}")
    if summary.get("running_min_error") is not None:
        lines.append(f"  running min row error: {summary['running_min_error']:.6g}")
    if "matrix_rows" in summary:
        lines.append(f"  matrix rows: {summary['matrix_rows']}")
    sv = summary.get("support_vectors")
    if sv:
        lines.append(
            f"  support vectors: {len(sv['by_weight'])} by weight, "
            f"{len(sv['by_margin'])} by margin, agree={sv['agree']}"
        )
        lines.append(
            f"  min margin {sv['min_margin']:.6g}, weighted margin "
            f"{sv['weighted_margin']:.6g} (drift {sv['drift']:.3g})"
        )
    cycle = summary.get("cycle", "absent")
    if cycle != "absent":
        if cycle is None:
            lines.append("  cycle: none detected")
        else:
            lines.append(
                f"  cycle: period {cycle['period']} from state {cycle['start_state']}"
            )
    if "final_test_error" in summary:
        lines.append(f"  final test error: {summary['final_test_error']:.4f}")
    return "\n".join(lines)
