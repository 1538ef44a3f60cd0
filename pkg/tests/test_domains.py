import math

import numpy as np
import pytest

from mtmapelites.domains import ArmDomain, ArmDomainConfig, ArmTask, SyntheticDomain, \
    arm_fitness, arm_forward_kinematics, arm_forward_kinematics_matrix, arm_normalize, \
    link_transform, make_domain, synthetic_fitness


def cumulative_angle_tip(angles, link_len):
    """Oracle: sum of link vectors, link k heading = sum of the angles before it."""
    tip = 0j
    heading = 0.0
    for a in angles:
        tip += link_len * complex(math.cos(heading), math.sin(heading))
        heading += a
    return np.array([tip.real, tip.imag])


class TestNormalize:
    def test_center_genome_is_straight(self):
        angles, _ = arm_normalize(np.full(10, 0.5), ArmTask(1.0, 1.0), 10)
        assert np.all(angles == 0)

    def test_formula(self):
        g = np.full(10, 0.5)
        g[3] = 1.0
        angles, link = arm_normalize(g, ArmTask(1.0, 1.0), 10)
        assert angles[3] == pytest.approx(math.pi / 10, rel=1e-15)
        assert link == pytest.approx(0.1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            arm_normalize(np.zeros(3), ArmTask(1, 1), 4)


class TestKinematics:
    def test_straight_chain(self):
        np.testing.assert_allclose(arm_forward_kinematics(np.zeros(7), 0.2), [1.4, 0.0])

    def test_two_link_product_by_hand(self):
        # A(a1) A(a2) (0,0,0,1)^T = l (1 + cos a1, sin a1): translate, then rotate
        a1, a2, l = 0.7, -1.3, 0.4
        m = link_transform(a1, l) @ link_transform(a2, l)
        np.testing.assert_allclose(m @ [0, 0, 0, 1], [l * (1 + math.cos(a1)), l * math.sin(a1), 0, 1],
                                   atol=1e-15)
        np.testing.assert_allclose(arm_forward_kinematics([math.pi / 2, 0.0], 0.5), [0.5, 0.5],
                                   atol=1e-15)
        np.testing.assert_allclose(arm_forward_kinematics([0.7, -1.3], 0.4),
                                   [l * (1 + math.cos(a1)), l * math.sin(a1)], atol=1e-15)

    def test_last_angle_does_not_move_tip(self):
        a = np.array([0.3, -0.2, 0.9])
        b = a.copy()
        b[-1] = 2.5
        np.testing.assert_array_equal(arm_forward_kinematics(a, 0.3), arm_forward_kinematics(b, 0.3))

    def test_random_d10_matrix_vs_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            angles = rng.uniform(-math.pi, math.pi, 10)
            ref = cumulative_angle_tip(angles, 0.1)
            assert np.abs(arm_forward_kinematics_matrix(angles, 0.1) - ref).max() <= 1e-12
            assert np.abs(arm_forward_kinematics(angles, 0.1) - ref).max() <= 1e-12


class TestArmFitness:
    def test_straight_arm(self):
        assert arm_fitness(np.full(10, 0.5), ArmTask(1.0, 0.7), ArmDomainConfig(10)) == \
            pytest.approx(-1.0, abs=1e-15)

    def test_zero_length(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            assert arm_fitness(rng.random(10), ArmTask(0.0, rng.random())) == \
                pytest.approx(-math.sqrt(2), abs=1e-15)

    def test_triangle_bound(self):
        rng = np.random.default_rng(2)
        dom = ArmDomain(10)
        f = dom(rng.random((5000, 10)), rng.random((5000, 2)))
        assert np.all(f >= -(1 + math.sqrt(2))) and np.all(f <= 0)

    @pytest.mark.parametrize("d", [1, 2, 5, 10, 20])
    def test_straight_tip_independent_of_d(self, d):
        for L in (0.0, 0.3, 1.0):
            angles, link = arm_normalize(np.full(d, 0.5), ArmTask(L, 0.8), d)
            np.testing.assert_allclose(arm_forward_kinematics(angles, link), [L, 0.0], atol=1e-15)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        dom = ArmDomain(6, target=(0.2, -0.4))
        g, t = rng.random((50, 6)), rng.random((50, 2))
        batch = dom(g, t)
        for k in range(50):
            cfg = ArmDomainConfig(6, (0.2, -0.4))
            assert batch[k] == pytest.approx(arm_fitness(g[k], ArmTask(*t[k]), cfg), abs=1e-14)

    def test_task_bounds(self):
        with pytest.raises(ValueError):
            ArmTask(1.2, 0.5)


class TestSynthetic:
    def test_optimum_is_zero(self):
        dom = SyntheticDomain()
        rng = np.random.default_rng(0)
        tau = rng.random((20, 12))
        np.testing.assert_array_equal(dom(dom.optimum(tau), tau), np.zeros(20))

    def test_one_coordinate_offset(self):
        dom = SyntheticDomain()
        tau = np.random.default_rng(1).random(12)
        theta = dom.optimum(tau).copy()
        theta[5] += 1 / 6
        expected = -((1 / 6) ** 2 - 0.9 * math.cos(math.pi) + 0.9) / 36
        assert expected == pytest.approx(-0.05077, abs=1e-5)
        assert synthetic_fitness(theta, tau, dom) == pytest.approx(expected, rel=1e-12)

    def test_lipschitz(self):
        dom = SyntheticDomain()
        rng = np.random.default_rng(2)
        a, b = rng.random((2000, 12)), rng.random((2000, 12))
        ratio = np.linalg.norm(dom.optimum(a) - dom.optimum(b), axis=1) / np.linalg.norm(a - b, axis=1)
        assert ratio.max() <= dom.lipschitz_bound()

    def test_term_non_negative_dense_scan(self):
        t = np.linspace(-1, 1, 200_001)
        term = t * t - 0.9 * np.cos(6 * math.pi * t) + 0.9
        assert term.min() >= 0
        zero = np.flatnonzero(term == 0)
        assert list(t[zero]) == [0.0]

    def test_non_positive_and_deterministic(self):
        dom = SyntheticDomain()
        rng = np.random.default_rng(3)
        g, t = rng.random((1000, 36)), rng.random((1000, 12))
        f = dom(g, t)
        assert np.all(f < 0)
        assert dom(g, t).tobytes() == f.tobytes()
        assert SyntheticDomain().weights.tobytes() == dom.weights.tobytes()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            SyntheticDomain()(np.zeros((1, 35)), np.zeros((1, 12)))

    def test_make_domain(self):
        assert make_domain("arm", 5).d_genome == 5
        assert make_domain("synthetic").d_task == 12
        with pytest.raises(ValueError):
            make_domain("hexapod")
