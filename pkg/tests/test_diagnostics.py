import math

import numpy as np
import pytest

from boostdyn.dataset import Dataset
from boostdyn.diagnostics import (
    birkhoff_average,
    default_checkpoints,
    detect_cycle,
    ensemble_score,
    margin_snapshot,
    margin_snapshot_at,
    min_margin_trace,
    selection_frequencies,
    support_vectors,
    tie_gap,
    unique_selection_trace,
)
from boostdyn.diagnostics import test_error_curve as error_curve
from boostdyn.dynamics import run, uniform_weight
from boostdyn.stumps import ConstantStump, Stump, build_matrix, enumerate_stumps
from boostdyn.synthetic import rudin3, two_gaussians
from conftest import make_traj, mat


class TestMargins:
    def test_one_round_signs(self):
        # single round misclassifying example 0 only
        m = mat([[1, 0], [0, 1]])
        traj, _ = run(m, np.array([0.25, 0.75]), 1)
        snap = margin_snapshot(traj)
        np.testing.assert_allclose(snap.beta, [-1.0, 1.0], atol=1e-15)
        assert snap.min_margin == pytest.approx(-1.0)

    def test_balanced_mass_gives_zero_margin(self):
        traj = make_traj(
            selected=[0, 1], alpha=[1.0, 1.0], m=2, n_rows=2, rows=[[1, 0], [0, 1]]
        )
        snap = margin_snapshot(traj)
        assert snap.beta[0] == pytest.approx(0.0)

    def test_matches_bruteforce_recomputation(self):
        ds = two_gaussians(m=30, seed=8)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 50)
        snap = margin_snapshot(traj)
        hits = 1.0 - 2.0 * m.rows_f64[traj.selected]  # +1 right, -1 wrong
        beta = (traj.alpha[:, None] * hits).sum(axis=0) / traj.alpha.sum()
        np.testing.assert_allclose(snap.beta, beta, atol=1e-12)

    def test_midrun_snapshot(self):
        ds = two_gaussians(m=30, seed=8)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 50)
        snap20 = margin_snapshot_at(traj, m, 20)
        short, _ = run(m, uniform_weight(ds.m), 20)
        np.testing.assert_allclose(snap20.beta, margin_snapshot(short).beta, atol=1e-12)

    def test_histogram_covers_unit_range(self):
        m = mat([[1, 0], [0, 1]])
        traj, _ = run(m, np.array([0.25, 0.75]), 1)
        snap = margin_snapshot(traj)
        assert snap.histogram.sum() == 2
        assert snap.bin_edges[0] == -1.0 and snap.bin_edges[-1] == 1.0
        assert len(snap.histogram) == 200

    def test_min_margin_trace(self):
        ds = two_gaussians(m=30, seed=8)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 40)
        snaps = [margin_snapshot_at(traj, m, t) for t in (10, 40)]
        trace = min_margin_trace(snaps)
        assert trace == [(10, snaps[0].min_margin), (40, snaps[1].min_margin)]


class TestTieGap:
    def test_plain_second_minus_first(self):
        rec = tie_gap(mat([[1, 0], [0, 1]]), np.array([0.3, 0.7]))
        assert rec.gap == pytest.approx(0.4, abs=1e-15)
        assert rec.merged_away == 0
        assert rec.best_row == 0

    def test_equivalent_rows_do_not_count_as_rivals(self):
        m = mat([[1, 0, 0], [1, 0, 1]])
        rec = tie_gap(m, np.array([0.6, 0.4, 0.0]), eps=1e-15)
        assert rec.merged_away == 1
        assert math.isinf(rec.gap)  # nothing left to compete with

    def test_gap_against_nearest_distinct_class(self):
        m = mat([[1, 0, 0], [1, 0, 1], [0, 1, 1]])
        rec = tie_gap(m, np.array([0.3, 0.7, 0.0]), eps=1e-15)
        assert rec.gap == pytest.approx(0.4, abs=1e-15)
        assert rec.merged_away == 1


class TestBirkhoff:
    def test_constant_series(self):
        rep = birkhoff_average(np.full(64, 2.5))
        assert rep.running_mean[-1] == pytest.approx(2.5)
        assert rep.drift[-1] == pytest.approx(0.0, abs=1e-15)

    def test_alternating_series_converges_to_half(self):
        rep = birkhoff_average(np.tile([0.0, 1.0], 512))
        assert rep.running_mean[-1] == pytest.approx(0.5, abs=1e-3)
        assert rep.drift[-1] < 1e-3

    def test_drift_shrinks_on_a_real_run(self):
        ds = two_gaussians(m=50, seed=1)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 4096)
        rep = birkhoff_average(traj.alpha)
        assert rep.drift[-1] < rep.drift[1]
        assert rep.drift[-1] < 1e-2

    def test_custom_checkpoints(self):
        rep = birkhoff_average(np.arange(10.0), checkpoints=[2, 5, 10])
        np.testing.assert_array_equal(rep.checkpoints, [2, 5, 10])
        assert rep.running_mean[-1] == pytest.approx(4.5)


class TestSelectionStats:
    def test_even_alternation(self):
        traj = make_traj(selected=[0, 1, 0, 1], alpha=[0.3] * 4, m=2, n_rows=2)
        freq = selection_frequencies(traj)
        np.testing.assert_allclose(freq.by_count, [0.5, 0.5])
        np.testing.assert_allclose(freq.by_alpha, [0.5, 0.5])

    def test_single_row(self):
        traj = make_traj(selected=[0, 0, 0], alpha=[0.1, 0.2, 0.3], m=2, n_rows=1)
        freq = selection_frequencies(traj)
        np.testing.assert_allclose(freq.by_count, [1.0])
        np.testing.assert_allclose(freq.by_alpha, [1.0])

    def test_prefix_restriction(self):
        traj = make_traj(selected=[0, 0, 1, 1], alpha=[1.0] * 4, m=2, n_rows=2)
        freq = selection_frequencies(traj, upto=2)
        np.testing.assert_allclose(freq.by_count, [1.0, 0.0])

    def test_order_ranks_by_count(self):
        traj = make_traj(selected=[2, 2, 2, 0], alpha=[1.0] * 4, m=2, n_rows=3)
        freq = selection_frequencies(traj)
        assert list(freq.order[:2]) == [2, 0]

    def test_unique_selection_trace(self):
        traj = make_traj(selected=[0, 0, 1], alpha=[1.0] * 3, m=2, n_rows=2)
        np.testing.assert_array_equal(unique_selection_trace(traj), [1, 1, 2])

    def test_constant_selection_trace(self):
        traj = make_traj(selected=[3, 3, 3, 3], alpha=[1.0] * 4, m=2, n_rows=4)
        np.testing.assert_array_equal(unique_selection_trace(traj), [1, 1, 1, 1])


class TestSupportVectors:
    def test_decayed_example_excluded_by_weight(self):
        ds = two_gaussians(m=40, seed=2)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 3000)
        snap = margin_snapshot(traj)
        report = support_vectors(traj, snap, ds.labels)
        assert len(report.by_weight) < ds.m  # some weight must have died
        outside = sorted(set(range(ds.m)) - set(report.by_weight))
        assert traj.final_weight[outside].max() <= 1e-8

    def test_symmetric_instance_keeps_everyone(self):
        ds = rudin3()
        m = build_matrix(ds, enumerate_stumps(ds, include_constant=True))
        traj, _ = run(m, uniform_weight(3), 999)
        report = support_vectors(traj, margin_snapshot(traj), ds.labels)
        assert report.by_weight == (0, 1, 2)
        assert report.by_margin == (0, 1, 2)
        assert report.agree

    def test_both_labels_present_on_mixed_data(self):
        ds = two_gaussians(m=40, seed=2)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 3000)
        report = support_vectors(traj, margin_snapshot(traj), ds.labels)
        assert report.positive_in_weight_set >= 1
        assert report.negative_in_weight_set >= 1

    def test_drift_is_distance_between_the_two_summaries(self):
        ds = two_gaussians(m=40, seed=2)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 3000)
        snap = margin_snapshot(traj)
        report = support_vectors(traj, snap, ds.labels)
        expect = abs(float(traj.final_weight @ snap.beta) - snap.min_margin)
        assert report.drift == pytest.approx(expect)


class TestCycleDetection:
    def test_constant_tail_is_a_fixed_point(self):
        w = np.array([0.2, 0.3, 0.5])
        traj = make_traj(
            selected=[0] * 30, alpha=[0.5] * 30, m=3, n_rows=2,
            tail=np.tile(w, (12, 1)),
        )
        rep = detect_cycle(traj, max_period=3)
        assert rep is not None and rep.period == 1
        assert rep.max_deviation == 0.0
        assert not rep.forward_checked  # no matrix to replay against

    def test_three_state_rotation(self):
        ds = rudin3()
        m = build_matrix(ds, enumerate_stumps(ds, include_constant=True))
        traj, _ = run(m, uniform_weight(3), 500, tail_window=64)
        rep = detect_cycle(traj, matrix=m)
        assert rep is not None
        assert rep.period == 3
        assert rep.max_deviation <= 1e-9
        assert rep.forward_checked

    def test_detected_states_match_golden_cycle(self):
        # the known limit cycle visits permutations of these three masses
        ds = rudin3()
        m = build_matrix(ds, enumerate_stumps(ds, include_constant=True))
        traj, _ = run(m, uniform_weight(3), 500, tail_window=16)
        w = traj.tail_weights[-1]
        expect = {0.5, 0.19098300562505255, 0.3090169943749474}
        assert {round(float(x), 12) for x in w} == {round(v, 12) for v in expect}

    def test_selection_sequence_must_be_periodic_too(self):
        # states repeat but the recorded selections do not: reject
        w = np.array([0.2, 0.3, 0.5])
        selected = list(np.arange(30) % 5)
        traj = make_traj(
            selected=selected, alpha=[0.5] * 30, m=3, n_rows=5,
            tail=np.tile(w, (12, 1)),
        )
        assert detect_cycle(traj, max_period=3) is None

    def test_no_cycle_in_a_short_mixing_run(self):
        # 200 examples keep the transient well past this horizon
        ds = two_gaussians(m=200, seed=5)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 600, tail_window=101)
        assert detect_cycle(traj, matrix=m, max_period=25) is None


class TestEnsembleScore:
    def test_training_scores_recover_margin_numerators(self):
        ds = two_gaussians(m=30, seed=8)
        m = build_matrix(ds, enumerate_stumps(ds))
        traj, _ = run(m, uniform_weight(ds.m), 60)
        scores = ensemble_score(ds.features, traj, m.representatives)
        signed = ds.labels.astype(np.float64) * scores
        np.testing.assert_allclose(
            signed, traj.margin_numerator / traj.n_rounds, atol=1e-12
        )

    def test_single_round_score(self):
        stump = Stump(0, 0.5, 1)
        traj = make_traj(selected=[0], alpha=[0.7], m=2, n_rows=1)
        X = np.array([[1.0], [0.0]])
        np.testing.assert_allclose(
            ensemble_score(X, traj, [stump]), [0.7, -0.7], atol=1e-15
        )

    def test_two_row_mass_example(self):
        # alpha mass (1.2, 0.4) on rows predicting (+1, -1): score (1.2-0.4)/4
        reps = [ConstantStump(1), ConstantStump(-1)]
        traj = make_traj(selected=[0, 0, 0, 1], alpha=[0.4, 0.4, 0.4, 0.4],
                         m=2, n_rows=2)
        scores = ensemble_score(np.zeros((1, 1)), traj, reps)
        assert scores[0] == pytest.approx(0.2, abs=1e-15)


class TestTestErrorCurve:
    def test_constant_positive_classifier(self):
        reps = [ConstantStump(1)]
        traj = make_traj(selected=[0, 0], alpha=[1.0, 1.0], m=2, n_rows=1)
        test = Dataset(np.zeros((5, 1)), np.array([1, 1, 1, -1, -1]))
        curve = error_curve(traj, reps, test, checkpoints=[2])
        assert curve.error[0] == pytest.approx(0.4)
        assert curve.zero_scores[0] == 0

    def test_perfect_classifier(self):
        stump = Stump(0, 0.5, 1)
        traj = make_traj(selected=[0], alpha=[1.0], m=2, n_rows=1)
        test = Dataset(np.array([[0.0], [1.0]]), np.array([-1, 1]))
        curve = error_curve(traj, [stump], test, checkpoints=[1])
        assert curve.error[0] == 0.0

    def test_zero_score_counts_as_error(self):
        reps = [ConstantStump(1), ConstantStump(-1)]
        traj = make_traj(selected=[0, 1], alpha=[1.0, 1.0], m=2, n_rows=2)
        test = Dataset(np.zeros((4, 1)), np.array([1, 1, -1, -1]))
        curve = error_curve(traj, reps, test, checkpoints=[2])
        assert curve.error[0] == 1.0
        assert curve.zero_scores[0] == 4

    def test_late_curve_settles_on_synthetic_split(self):
        from boostdyn.dataset import split

        ds = two_gaussians(m=120, seed=4)
        train, test = split(ds, 0.5, seed=0)
        m = build_matrix(train, enumerate_stumps(train))
        traj, _ = run(m, uniform_weight(train.m), 2000)
        curve = error_curve(traj, m.representatives, test)
        late = curve.error[-10:]
        assert late.std() <= 0.02

    def test_checkpoint_validation(self):
        traj = make_traj(selected=[0], alpha=[1.0], m=2, n_rows=1)
        test = Dataset(np.zeros((2, 1)), np.array([1, -1]))
        with pytest.raises(ValueError):
            error_curve(traj, [ConstantStump(1)], test, checkpoints=[0, 1])
        with pytest.raises(ValueError):
            error_curve(traj, [ConstantStump(1)], test, checkpoints=[5])


class TestCheckpoints:
    def test_log_spaced_unique(self):
        cps = default_checkpoints(10_000)
        assert cps[0] == 1 and cps[-1] == 10_000
        assert (np.diff(cps) > 0).all()

    def test_small_counts(self):
        np.testing.assert_array_equal(default_checkpoints(3), [1, 2, 3])
