import numpy as np
import pytest

from ustalign import se3
from ustalign.demo import gesture_instance, gesture_template
from ustalign.errors import EmptyTemplateSet, GridMismatch, StepTooLarge
from ustalign.matching import (
    BodyTrajectory,
    classify_nearest,
    classify_trajectory,
    delta_signal,
    dtw_distance,
    left_translate,
    pointwise_distance,
    quotient_distance,
    relative_motion_signal,
    screw_signal,
    squared_cost_matrix,
    trajectory_signal,
    ust_distance,
)
from ustalign.metric_spaces import (
    Signal,
    TimeGrid,
    random_warp,
    scalar_space,
    se3_space,
)
from ustalign.reparam import apply_warp
from ustalign.synth import smooth_scalar_signal, smooth_se3_signal, smooth_warp


def scalar(values):
    return Signal(np.asarray(values, dtype=float), scalar_space())


def exhaustive_dtw(cost):
    """Oracle: minimum over all monotone boundary-anchored paths of the
    weighted cost (diagonal steps weigh their node twice), normalized by
    n + m.  Left-to-right accumulation matches the DP's float ops."""
    n, m = cost.shape
    best = [np.inf]

    def walk(i, j, acc):
        if i == n - 1 and j == m - 1:
            best[0] = min(best[0], acc)
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc + 2.0 * cost[i + 1, j + 1])
        if i + 1 < n:
            walk(i + 1, j, acc + cost[i + 1, j])
        if j + 1 < m:
            walk(i, j + 1, acc + cost[i, j + 1])

    walk(0, 0, 2.0 * cost[0, 0])
    return best[0] / (n + m)


class TestPointwise:
    def test_self_distance(self):
        sig = smooth_scalar_signal(0, 301)
        assert pointwise_distance(sig, sig).distance == 0.0

    def test_constant_offset(self):
        n = 101
        d = pointwise_distance(scalar(np.zeros(n)), scalar(np.ones(n))).distance
        assert d == pytest.approx(1.0, abs=1e-12)

    def test_linear_ramp(self):
        t = TimeGrid(1001).times
        d = pointwise_distance(scalar(np.zeros(1001)), scalar(t)).distance
        assert d == pytest.approx(1.0 / 3.0, abs=1e-4)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            pointwise_distance(scalar(np.zeros(5)), scalar(np.zeros(6)))


class TestUstDistance:
    def test_warped_copy_is_close(self):
        for k in range(6):
            sig = smooth_scalar_signal(k, 2001)
            warped = apply_warp(sig, random_warp(50 + k, 0.5, 2001))
            assert ust_distance(sig, warped).distance < 1e-3

    def test_self_distance(self):
        sig = smooth_se3_signal(1, 301)
        assert ust_distance(sig, sig).distance <= 1e-12

    def test_sine_vs_cosine_floor(self):
        # brute-force oracle: no warp pair brings the pair below the floor
        n = 201
        t = TimeGrid(n).times
        x1 = scalar(np.sin(np.pi * t))
        x2 = scalar(np.cos(np.pi * t))
        floor = np.inf
        for k in range(200):
            w1 = random_warp(2 * k, 0.6, n)
            w2 = random_warp(2 * k + 1, 0.6, n)
            d = pointwise_distance(apply_warp(x1, w1), apply_warp(x2, w2)).distance
            floor = min(floor, d)
        assert floor > 0.05
        assert ust_distance(x1, x2).distance > 0.05

    def test_symmetry(self):
        for k in range(5):
            a = smooth_scalar_signal(k, 501)
            b = smooth_scalar_signal(100 + k, 501)
            assert abs(ust_distance(a, b).distance
                       - ust_distance(b, a).distance) < 1e-12


class TestDtw:
    def test_identical(self):
        sig = smooth_scalar_signal(2, 200)
        assert dtw_distance(sig, sig).distance == 0.0

    def test_single_sample_shift_bound(self):
        n = 64
        vals = np.sin(np.linspace(0.0, 3.0, n))
        shifted = np.concatenate([[vals[0]], vals[:-1]])
        report = dtw_distance(scalar(vals), scalar(shifted))
        # explicit path: diagonal after absorbing the shift at the corners
        cost = squared_cost_matrix(scalar(vals), scalar(shifted))
        acc = 2.0 * cost[0, 0] + cost[1, 0]
        for k in range(1, n - 1):
            acc += 2.0 * cost[k + 1, k]
        acc += cost[n - 1, n - 1]
        assert report.distance <= acc / (2 * n) + 1e-15

    def test_absorbs_monotone_warp(self):
        sig = smooth_scalar_signal(3, 50)
        warped = apply_warp(sig, smooth_warp(9, 50, strength=0.5))
        raw = pointwise_distance(sig, warped).distance
        assert dtw_distance(sig, warped).distance < raw / 10

    @pytest.mark.parametrize("n,m", [(4, 4), (5, 7), (8, 8), (8, 3), (2, 8)])
    def test_matches_exhaustive_enumeration(self, n, m):
        rng = np.random.default_rng(n * 100 + m)
        a = scalar(rng.normal(size=n))
        b = scalar(rng.normal(size=m))
        report = dtw_distance(a, b)
        oracle = exhaustive_dtw(squared_cost_matrix(a, b))
        assert report.distance == oracle

    def test_nopath_fast_route_agrees(self):
        a = smooth_scalar_signal(4, 300)
        b = smooth_scalar_signal(5, 300)
        full = dtw_distance(a, b).distance
        fast = dtw_distance(a, b, keep_path=False).distance
        assert full == pytest.approx(fast, rel=1e-12)

    def test_lower_bound_against_diagonal_cost(self):
        for k in range(10):
            a = smooth_scalar_signal(k, 128)
            b = smooth_scalar_signal(50 + k, 128)
            cost = squared_cost_matrix(a, b)
            diag_mean = float(np.mean(np.diag(cost)))
            assert dtw_distance(a, b).distance <= diag_mean + 1e-12

    def test_path_profile_consistent(self):
        a = smooth_scalar_signal(6, 40)
        b = smooth_scalar_signal(7, 40)
        report = dtw_distance(a, b)
        weights = [2.0]
        for (i0, j0), (i1, j1) in zip(report.path, report.path[1:]):
            weights.append(2.0 if (i1 - i0, j1 - j0) == (1, 1) else 1.0)
        recon = float(np.sum(np.asarray(weights) * report.profile**2)) / (len(a) + len(b))
        assert recon == pytest.approx(report.distance, rel=1e-12)


class TestClassify:
    def test_exact_template_wins_with_zero_score(self):
        templates = [(f"c{k}", smooth_scalar_signal(k, 301)) for k in range(4)]
        label, score, scores = classify_nearest(templates[2][1], templates)
        assert label == "c2" and score == 0.0 and len(scores) == 4

    def test_warped_copy_classified(self):
        templates = [(f"c{k}", smooth_scalar_signal(k, 801)) for k in range(4)]
        query = apply_warp(templates[1][1], random_warp(3, 0.5, 801))
        label, _, _ = classify_nearest(query, templates, method="ust")
        assert label == "c1"

    def test_single_template(self):
        sig = smooth_scalar_signal(0, 101)
        label, _, _ = classify_nearest(smooth_scalar_signal(5, 101), [("only", sig)])
        assert label == "only"

    def test_empty_raises(self):
        with pytest.raises(EmptyTemplateSet):
            classify_nearest(smooth_scalar_signal(0, 101), [])

    def test_tie_breaks_to_lowest_index(self):
        sig = smooth_scalar_signal(0, 101)
        label, _, _ = classify_nearest(sig, [("a", sig), ("b", sig)], method="raw")
        assert label == "a"


def _random_pose_curve(seed, n, scale=0.8):
    return smooth_se3_signal(seed, n, max_angle=scale).values


class TestQuotients:
    def test_relative_motion_cancels_static_pose(self):
        traj = gesture_template("wave", 80)
        g0 = se3.random_se3(11, 2.0)
        rel0 = relative_motion_signal(traj).values
        rel1 = relative_motion_signal(left_translate(traj, g0)).values
        assert np.max(np.abs(rel0 - rel1)) < 1e-12

    def test_relative_motion_cancels_dynamic_pose(self):
        traj = gesture_template("throw", 80)
        g_t = _random_pose_curve(3, 80)
        rel0 = relative_motion_signal(traj).values
        rel1 = relative_motion_signal(left_translate(traj, g_t)).values
        assert np.max(np.abs(rel0 - rel1)) < 1e-12

    def test_equal_joints_give_identity(self):
        sig = smooth_se3_signal(2, 60)
        traj = BodyTrajectory(sig, sig, sig)
        rel = relative_motion_signal(traj).values
        assert np.max(np.abs(rel - np.eye(4))) < 1e-12

    def test_delta_of_constant_is_identity(self):
        vals = np.tile(se3.random_se3(0, 1.0), (30, 1, 1))
        deltas = delta_signal(Signal(vals, se3_space()))
        assert np.max(np.abs(deltas.values - np.eye(4))) < 1e-12

    def test_delta_invariant_to_static_pose(self):
        sig = smooth_se3_signal(4, 60)
        g0 = se3.random_se3(5, 1.5)
        moved = Signal(se3.compose(g0, sig.values), se3_space())
        assert np.max(np.abs(delta_signal(sig).values - delta_signal(moved).values)) < 1e-12

    def test_delta_of_uniform_screw_is_constant(self):
        xi = np.array([0.0, 0.0, 0.4, 0.1, 0.0, 0.05])
        steps = np.arange(40)[:, None] * xi[None, :]
        sig = Signal(se3.exp_se3(steps), se3_space())
        deltas = delta_signal(sig, step=3)
        expected = se3.exp_se3(3.0 * xi)
        assert np.max(np.abs(deltas.values - expected)) < 1e-12

    def test_step_too_large(self):
        sig = smooth_se3_signal(0, 10)
        with pytest.raises(StepTooLarge):
            delta_signal(sig, step=9)

    def test_screw_signal_of_constant(self):
        vals = np.tile(se3.random_se3(0, 1.0), (20, 1, 1))
        theta, d = screw_signal(Signal(vals, se3_space()))
        assert np.max(np.abs(theta.values)) == 0.0
        assert np.max(np.abs(d.values)) < 1e-12

    def test_screw_signal_of_uniform_rotation(self):
        xi = np.array([0.0, 0.0, np.pi / 4, 0.0, 0.0, 0.0])
        steps = np.arange(24)[:, None] * xi[None, :]
        sig = Signal(se3.exp_se3(steps), se3_space())
        theta, d = screw_signal(sig)
        assert np.max(np.abs(theta.values - np.pi / 4)) < 1e-12
        assert np.max(np.abs(d.values)) < 1e-12

    def test_screw_signal_conjugation_invariant(self):
        sig = smooth_se3_signal(6, 60)
        a = se3.random_se3(7, 1.5)
        conj = Signal(se3.compose(a, se3.compose(sig.values, se3.inverse(a))),
                      se3_space())
        t0, d0 = screw_signal(sig)
        t1, d1 = screw_signal(conj)
        assert np.max(np.abs(t0.values - t1.values)) < 1e-9
        assert np.max(np.abs(d0.values - d1.values)) < 1e-9


class TestQuotientDistance:
    def test_identical(self):
        traj = gesture_template("wave", 80)
        assert quotient_distance(traj, traj).distance <= 1e-12

    def test_posed_warped_copy_is_close(self):
        traj = gesture_template("rub_eyes", 2001)
        w = smooth_warp(4, 2001, strength=0.5)
        warped = BodyTrajectory(
            apply_warp(traj.shoulder, w),
            apply_warp(traj.elbow, w),
            apply_warp(traj.hand, w),
        )
        moved = left_translate(warped, se3.random_se3(13, 1.5))
        assert quotient_distance(traj, moved).distance < 1e-2

    def test_distinct_gestures_separate(self):
        wave = gesture_template("wave", 200)
        throw = gesture_template("throw", 200)
        matched = quotient_distance(wave, wave, method="relative").distance
        crossed = quotient_distance(wave, throw, method="relative").distance
        assert crossed > 10 * max(matched, 1e-4)

    def test_screw_route_invariant_to_pose(self):
        traj = gesture_template("scratch_head", 100)
        moved = left_translate(traj, se3.random_se3(17, 2.0))
        d = quotient_distance(traj, moved, method="screw").distance
        assert d < 1e-12

    def test_classification_argmax_invariance(self):
        templates = [(name, gesture_instance(name, seed=100 + i, n=90))
                     for i, name in enumerate(("wave", "throw", "rub_eyes"))]
        query = gesture_instance("throw", seed=200, n=90)
        base, _, _ = classify_trajectory(query, templates, quotient="relative")
        g0 = se3.random_se3(23, 2.0)
        moved = [(name, left_translate(t, g0)) for name, t in templates]
        shifted, _, _ = classify_trajectory(query, moved, quotient="relative")
        assert base == shifted == "throw"

    def test_trajectory_signal_none_quotient(self):
        traj = gesture_template("thumbs_up", 60)
        sig = trajectory_signal(traj, quotient="none")
        assert sig.space.tag == "se3_product(3)"
        assert len(sig) == 60
