import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilatia import (DomainError, PreconditionError, Space, ToleranceConfig,
                     Window, check_metric_axioms, diameter, distance,
                     gallery_build, rescale_to_diameter)
from conftest import floyd_warshall_closure, random_premetric


def euclidean_plane():
    return Space.analytic("plane", "euclidean", 2, Window.box([-5, -5], [5, 5]),
                          basepoint=[0.0, 0.0])


class TestDistance:
    def test_pythagoras(self):
        s = euclidean_plane()
        assert distance(s, np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 5.0

    def test_self_distance_zero(self, cfg):
        s = euclidean_plane()
        for p in s.sample(10, cfg.seed):
            assert distance(s, p, p) == 0.0

    def test_matrix_lookup(self):
        m = [[0.0, 0.3, 0.5], [0.3, 0.0, 0.7], [0.5, 0.7, 0.0]]
        s = Space.from_matrix("three", m)
        assert distance(s, 1, 2) == 0.7

    def test_out_of_universe_finite(self):
        s = Space.from_matrix("two", [[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(DomainError):
            distance(s, 0, 5)

    def test_wrong_dimension_analytic(self):
        s = euclidean_plane()
        with pytest.raises(DomainError):
            distance(s, np.array([1.0, 2.0, 3.0]), np.array([0.0, 0.0]))

    def test_bounded_domain_enforced(self):
        cube = gallery_build("sup_cube", {"n": 2})
        with pytest.raises(DomainError):
            distance(cube, np.array([2.0, 0.0]), np.array([0.0, 0.0]))

    def test_oracle_purity(self):
        s = euclidean_plane()
        p, q = np.array([0.1, 0.7]), np.array([-1.3, 2.2])
        assert distance(s, p, q) == distance(s, p, q)

    def test_matrix_validation(self):
        with pytest.raises(Exception):
            Space.from_matrix("bad", [[0.0, 1.0], [2.0, 0.0]])  # asymmetric
        with pytest.raises(Exception):
            Space.from_matrix("bad", [[1.0, 1.0], [1.0, 0.0]])  # nonzero diagonal


class TestMetricAxioms:
    def test_euclidean_disk_passes(self, cfg):
        rep = check_metric_axioms(gallery_build("euclidean_ball"), cfg)
        assert rep.passed
        assert rep.record("triangle_inequality").max_violation <= 1e-12

    def test_non_metric_matrix_fails_with_witness(self, cfg):
        m = [[0.0, 5.0, 10.0], [5.0, 0.0, 1.0], [10.0, 1.0, 0.0]]
        rep = check_metric_axioms(Space.from_matrix("bad", m), cfg)
        rec = rep.record("triangle_inequality")
        assert not rec.passed
        assert rec.max_violation == pytest.approx(4.0, abs=1e-12)
        assert set(rec.witness) == {0, 1, 2}

    def test_closure_repair_passes(self, cfg):
        rng = np.random.default_rng(3)
        m = floyd_warshall_closure(random_premetric(rng, 9))
        rep = check_metric_axioms(Space.from_matrix("repaired", m), cfg)
        assert rep.passed

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(3, 8))
    def test_closure_repair_property(self, seed, n):
        rng = np.random.default_rng(seed)
        m = floyd_warshall_closure(random_premetric(rng, n))
        rep = check_metric_axioms(Space.from_matrix("repaired", m),
                                  ToleranceConfig(sample_pairs=20, seed=seed))
        assert rep.passed

    def test_empty_space_rejected(self, cfg):
        with pytest.raises(Exception):
            Space.from_matrix("empty", np.zeros((0, 0)))


class TestDiameter:
    def test_circle_arc_is_pi(self, cfg):
        est = diameter(gallery_build("circle_arc"), cfg)
        assert est.value == math.pi
        assert est.exact

    def test_finite_is_max_entry(self, cfg):
        est = diameter(Space.from_matrix("two", [[0.0, 0.7], [0.7, 0.0]]), cfg)
        assert est.value == 0.7
        assert est.exact and set(est.witness) == {0, 1}

    def test_ball_diameter(self, cfg):
        est = diameter(gallery_build("euclidean_ball"), cfg)
        assert est.value == 2.0

    def test_sampled_lower_bound_flag(self, cfg):
        heis = gallery_build("heisenberg")
        est = diameter(heis, cfg)
        assert not est.exact
        # lower bound: some sampled pair realizes at least the reported value
        p, q = est.witness
        assert heis.distance(p, q) == pytest.approx(est.value)


class TestRescale:
    def test_circle_to_diameter_two(self, cfg):
        circle = gallery_build("circle_arc")
        scaled = rescale_to_diameter(circle, 2.0, cfg)
        p, q = np.array([0.0]), np.array([1.0])
        assert scaled.distance(p, q) == pytest.approx(circle.distance(p, q) * 2 / math.pi,
                                                      rel=1e-15)
        assert diameter(scaled, cfg).value == pytest.approx(2.0, abs=1e-15)

    def test_identity_when_already_target(self, cfg):
        ball = gallery_build("euclidean_ball")
        assert rescale_to_diameter(ball, 2.0, cfg) is ball

    def test_finite_exact_target(self, cfg):
        m = np.array([[0.0, 4.0, 10.0], [4.0, 0.0, 7.0], [10.0, 7.0, 0.0]])
        scaled = rescale_to_diameter(Space.from_matrix("m", m), 2.0, cfg)
        assert scaled.matrix.max() == 2.0

    def test_ratios_preserved(self, cfg):
        circle = gallery_build("circle_arc")
        scaled = rescale_to_diameter(circle, 2.0, cfg)
        pts = circle.sample(12, cfg.seed)
        for i in range(0, 10, 2):
            a, b, c, e = pts[i], pts[i + 1], pts[(i + 2) % 12], pts[(i + 3) % 12]
            if circle.distance(c, e) <= cfg.abs_tol:
                continue
            before = circle.distance(a, b) / circle.distance(c, e)
            after = scaled.distance(a, b) / scaled.distance(c, e)
            assert after == pytest.approx(before, abs=cfg.exact_tol * (1 + abs(before)))

    def test_single_point_space_rejected(self, cfg):
        s = Space.from_matrix("point", [[0.0]])
        with pytest.raises(DomainError):
            rescale_to_diameter(s, 2.0, cfg)

    def test_nonpositive_target_rejected(self, cfg):
        with pytest.raises(PreconditionError):
            rescale_to_diameter(gallery_build("circle_arc"), 0.0, cfg)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10 ** 6), st.floats(0.5, 4.0))
    def test_rescale_multiplicative_property(self, seed, target):
        rng = np.random.default_rng(seed)
        m = floyd_warshall_closure(random_premetric(rng, 5))
        s = Space.from_matrix("m", m)
        scaled = rescale_to_diameter(s, target)
        scale = target / m.max()
        for i in range(5):
            for j in range(5):
                assert scaled.matrix[i, j] == pytest.approx(m[i, j] * scale, rel=1e-12)
