import numpy as np
import pytest

from ustalign import se3
from ustalign.errors import AngleNearPi


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def random_twists(count, seed, max_angle=3.0):
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=(count, 6))
    norms = np.linalg.norm(xi[:, :3], axis=1, keepdims=True)
    xi[:, :3] *= rng.uniform(0.0, max_angle, size=(count, 1)) / np.maximum(norms, 1e-12)
    return xi


class TestGroupOps:
    def test_identity(self):
        x = se3.random_se3(0, 1.0)
        assert np.allclose(se3.compose(se3.identity(), x), x)

    def test_inverse_roundtrip(self):
        x = se3.random_se3(1, 2.0)
        assert np.max(np.abs(se3.compose(x, se3.inverse(x)) - np.eye(4))) < 1e-12
        assert np.max(np.abs(se3.inverse(se3.inverse(x)) - x)) < 1e-12

    def test_translations_add(self):
        a = se3.from_rotation_translation(np.eye(3), [1.0, 0.0, 0.0])
        b = se3.from_rotation_translation(np.eye(3), [0.0, 2.0, 0.0])
        assert np.allclose(se3.translation_of(se3.compose(a, b)), [1.0, 2.0, 0.0])

    def test_inverse_of_translation(self):
        x = se3.from_rotation_translation(np.eye(3), [1.0, 2.0, 3.0])
        assert np.allclose(se3.translation_of(se3.inverse(x)), [-1.0, -2.0, -3.0])


class TestExpLog:
    def test_zero_twist(self):
        assert np.array_equal(se3.exp_se3(np.zeros(6)), np.eye(4))

    def test_quarter_turn_about_z(self):
        x = se3.exp_se3(np.array([0.0, 0.0, np.pi / 2, 0.0, 0.0, 0.0]))
        assert np.max(np.abs(se3.rotation_of(x) - rot_z(np.pi / 2))) < 1e-15
        assert np.allclose(se3.translation_of(x), 0.0)

    def test_pure_translation(self):
        x = se3.exp_se3(np.array([0.0, 0.0, 0.0, 1.0, 2.0, 3.0]))
        assert np.allclose(x, se3.from_rotation_translation(np.eye(3), [1.0, 2.0, 3.0]))

    def test_log_identity(self):
        assert np.array_equal(se3.log_se3(np.eye(4)), np.zeros(6))

    def test_log_quarter_turn(self):
        xi = se3.log_se3(se3.from_rotation_translation(rot_z(np.pi / 2), np.zeros(3)))
        assert np.allclose(xi[:3], [0.0, 0.0, np.pi / 2], atol=1e-12)

    def test_roundtrip_10k(self):
        xi = random_twists(10_000, 0)
        back = se3.exp_se3(se3.log_se3(se3.exp_se3(xi)))
        err = np.max(np.abs(back - se3.exp_se3(xi)))
        assert err < 1e-9

    def test_small_angle_branch(self):
        xi = np.array([1e-10, -2e-10, 5e-11, 0.3, -0.1, 0.2])
        assert np.max(np.abs(se3.exp_se3(se3.log_se3(se3.exp_se3(xi))) - se3.exp_se3(xi))) < 1e-15

    def test_angle_near_pi_raises(self):
        x = se3.from_rotation_translation(rot_z(np.pi), [0.1, 0.0, 0.0])
        with pytest.raises(AngleNearPi):
            se3.log_se3(x)
        with pytest.raises(AngleNearPi):
            se3.metric(np.eye(4), x)


class TestMetric:
    def test_self_distance(self):
        x = se3.random_se3(5, 1.5)
        assert se3.metric(x, x) == 0.0

    def test_pure_translation_is_euclidean(self):
        x = se3.from_rotation_translation(np.eye(3), [3.0, 4.0, 0.0])
        assert se3.metric(np.eye(4), x) == pytest.approx(5.0)

    def test_left_invariance_10k(self):
        x0 = np.stack([se3.random_se3(3 * i, 1.5) for i in range(10_000)])
        x1 = np.stack([se3.random_se3(3 * i + 1, 1.0) for i in range(10_000)])
        x2 = np.stack([se3.random_se3(3 * i + 2, 1.0) for i in range(10_000)])
        lhs = se3.metric(se3.compose(x0, x1), se3.compose(x0, x2))
        rhs = se3.metric(x1, x2)
        assert np.max(np.abs(lhs - rhs)) < 1e-10


class TestInterpolate:
    def test_endpoints(self):
        a, b = se3.random_se3(1, 1.0), se3.random_se3(2, 1.0)
        assert np.max(np.abs(se3.interpolate(a, b, 0.0) - a)) < 1e-15
        assert np.max(np.abs(se3.interpolate(a, b, 1.0) - b)) < 1e-12

    def test_translation_midpoint(self):
        a = np.eye(4)
        b = se3.from_rotation_translation(np.eye(3), [2.0, 0.0, 0.0])
        mid = se3.interpolate(a, b, 0.5)
        assert np.allclose(se3.translation_of(mid), [1.0, 0.0, 0.0])

    def test_geodesic_proportionality_and_additivity(self):
        a, b = se3.random_se3(3, 1.2), se3.random_se3(4, 1.2)
        total = se3.metric(a, b)
        for alpha in (0.2, 0.5, 0.9):
            m = se3.interpolate(a, b, alpha)
            assert se3.metric(a, m) == pytest.approx(alpha * total, abs=1e-9)
            assert se3.metric(a, m) + se3.metric(m, b) == pytest.approx(total, abs=1e-9)


class TestScrewInvariants:
    def test_identity(self):
        inv = se3.screw_invariants(np.eye(4))
        assert inv.theta == 0.0 and inv.d == 0.0

    def test_quarter_turn_with_axial_translation(self):
        x = se3.from_rotation_translation(rot_z(np.pi / 2), [0.0, 0.0, 1.0])
        inv = se3.screw_invariants(x)
        assert inv.theta == pytest.approx(np.pi / 2)
        assert inv.d == pytest.approx(1.0)

    def test_pure_translation_limit(self):
        x = se3.from_rotation_translation(np.eye(3), [1.0, 2.0, 2.0])
        inv = se3.screw_invariants(x)
        assert inv.theta == 0.0
        assert inv.d == pytest.approx(3.0)

    def test_conjugation_invariance_1k(self):
        worst_theta, worst_d = 0.0, 0.0
        for i in range(1000):
            x = se3.random_se3(2 * i, 2.0)
            a = se3.random_se3(2 * i + 1, 2.0)
            base = se3.screw_invariants(x)
            conj = se3.screw_invariants(se3.compose(a, se3.compose(x, se3.inverse(a))))
            worst_theta = max(worst_theta, abs(base.theta - conj.theta))
            worst_d = max(worst_d, abs(base.d - conj.d))
        assert worst_theta < 1e-9
        assert worst_d < 1e-9


class TestRandomSe3:
    def test_deterministic(self):
        assert np.array_equal(se3.random_se3(9, 1.3), se3.random_se3(9, 1.3))

    def test_valid_element(self):
        for seed in range(20):
            assert se3.check_se3(se3.random_se3(seed, 2.5))

    def test_zero_scale_is_identity(self):
        assert np.allclose(se3.random_se3(0, 0.0), np.eye(4))


class TestStructureConstants:
    def test_bracket_table_matches_commutators(self):
        basis = se3.SE3_BASIS
        c = se3.SE3_STRUCTURE
        for i in range(6):
            for j in range(6):
                comm = basis[i] @ basis[j] - basis[j] @ basis[i]
                recon = np.einsum("k,kab->ab", c[i, j], basis)
                assert np.max(np.abs(comm - recon)) < 1e-14

    def test_known_entries(self):
        c = se3.SE3_STRUCTURE
        # [rot_x, rot_y] = rot_z and [rot_x, trans_y] = trans_z
        assert c[0, 1, 2] == pytest.approx(1.0)
        assert c[0, 4, 5] == pytest.approx(1.0)
        assert np.allclose(c[3:, 3:, :], 0.0)
