import math

import numpy as np
import pytest

from dilatia import (DecompositionError, PreconditionError, RadialAction, Space,
                     ToleranceConfig, Window, boundary_set, cone_coordinates,
                     default_epsilon, gallery_build, gamma, gamma_grid_oracle,
                     verify_cone_homeomorphism, verify_metric_cone,
                     verify_partition, verify_radial_action)


def disk_action(r=1.0):
    return gallery_build("disk_radial_action", {"r": r})


def parabolic_action():
    """Radial scaling conjugated by r -> r^2: act(a, x) = sqrt(a) * x.

    Composes exactly (sqrt(a)*sqrt(b) = sqrt(ab)) but its orbit speed is
    nonlinear in the scale, so crossings genuinely need the bisection.
    """
    space = gallery_build("euclidean_ball", {"n": 2, "r": 1.0})

    def act(alpha, p):
        return math.sqrt(float(alpha)) * p

    return RadialAction(space=space, act=act, name="parabolic",
                        declared_shrinking=True, expanding=True)


class TestVerifyRadialAction:
    def test_disk_action_passes(self, cfg):
        rep = verify_radial_action(disk_action(), cfg)
        assert rep.passed

    def test_composition_failure_detected(self, cfg):
        space = gallery_build("euclidean_ball", {"n": 2, "r": 1.0})
        v = np.array([0.3, 0.0])

        def act(alpha, p):
            a = float(alpha)
            return a * p + a * (1.0 - a) * v

        rep = verify_radial_action(RadialAction(space=space, act=act,
                                                name="drifting"), cfg)
        assert not rep.record("act_composition").passed

    def test_fixed_ring_fails_only_shrinking(self, cfg):
        rep = verify_radial_action(gallery_build("fixed_ring_action"), cfg)
        outcomes = {r.name: r.passed for r in rep.checks}
        assert outcomes == {"act_zero": True, "act_one": True,
                            "act_composition": True, "shrinking": False}


class TestGamma:
    def test_disk_gamma_is_norm(self, cfg):
        act = disk_action()
        g = gamma(act, np.array([0.3, 0.4]), 1.0, cfg)
        assert g == pytest.approx(0.5, abs=1e-9)

    def test_center_gamma_zero(self, cfg):
        act = disk_action()
        assert gamma(act, np.array([0.0, 0.0]), 1.0, cfg) == 0.0

    def test_sphere_point_gamma_one(self, cfg):
        act = disk_action()
        assert gamma(act, np.array([0.6, 0.8]), 1.0, cfg) == pytest.approx(1.0, abs=1e-9)

    def test_parabolic_gamma_against_analytic_value(self, cfg):
        # crossing solves sqrt(b)*|x| = eps, so gamma = 1/b = (|x|/eps)^2
        act = parabolic_action()
        x = np.array([0.3, 0.4])
        g = gamma(act, x, 0.9, cfg)
        assert g == pytest.approx((0.5 / 0.9) ** 2, abs=1e-8)

    def test_gamma_monotone_along_orbits(self, cfg):
        act = disk_action()
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = rng.uniform(-0.7, 0.7, 2)
            if np.linalg.norm(x) < 0.05:
                continue
            b = float(rng.uniform(0.1, 1.0))
            lhs = gamma(act, act.act(b, x), 1.0, cfg)
            rhs = b * gamma(act, x, 1.0, cfg)
            assert lhs == pytest.approx(rhs, abs=1e-8)

    def test_grid_oracle_agrees_within_one_cell(self, cfg):
        act = parabolic_action()
        for x in act.space.sample(8, cfg.seed):
            if np.linalg.norm(x) < 0.05:
                continue
            beta = 1.0 / gamma(act, x, 0.9, cfg)
            lo, hi, width = gamma_grid_oracle(act, x, 0.9, cfg, n=512)
            assert lo - width <= beta <= hi + width

    def test_stalled_orbit_raises(self, cfg):
        act = gallery_build("fixed_ring_action")
        with pytest.raises(DecompositionError):
            gamma(act, np.array([2.5, 0.0]), 2.9, cfg)


class TestBoundarySet:
    def test_disk_boundary_on_unit_circle(self, cfg):
        cs = boundary_set(disk_action(), 1.0, cfg, count=50)
        assert cs
        for c in cs:
            assert np.linalg.norm(c) == pytest.approx(1.0, abs=1e-9)

    def test_cube_boundary_max_coordinate(self, cfg):
        act = gallery_build("cube_coordinatewise_action")
        cs = boundary_set(act, 0.9, cfg, count=50)
        for c in cs:
            assert np.max(np.abs(c)) == pytest.approx(0.9, abs=1e-9)

    def test_degenerate_space_rejected(self, cfg):
        space = Space.from_matrix("point", [[0.0]], basepoint=0)
        act = RadialAction(space=space, act=lambda a, p: p, name="trivial")
        with pytest.raises(DecompositionError):
            boundary_set(act, 1.0, cfg)


class TestConeCoordinates:
    def test_disk_polar_coordinates(self, cfg):
        cc = cone_coordinates(disk_action(), np.array([0.3, 0.4]), 1.0, cfg)
        assert cc.alpha == pytest.approx(0.5, abs=1e-9)
        assert np.allclose(cc.base, [0.6, 0.8], atol=1e-9)
        assert not cc.basepoint_arbitrary

    def test_sphere_point_maps_to_itself(self, cfg):
        x = np.array([0.6, 0.8])
        cc = cone_coordinates(disk_action(), x, 1.0, cfg)
        assert cc.alpha == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(cc.base, x, atol=1e-9)

    def test_center_flagged_arbitrary(self, cfg):
        cc = cone_coordinates(disk_action(), np.array([0.0, 0.0]), 1.0, cfg)
        assert cc.alpha == 0.0 and cc.base is None and cc.basepoint_arbitrary


class TestVerifyPartition:
    def test_disk_partition(self, cfg):
        rep = verify_partition(disk_action(), cfg, epsilon=1.0)
        assert rep.passed

    def test_cube_partition_and_closed_face_set(self, cfg):
        # finite-dimensional cube: the face set {max coordinate = 1} stays at
        # distance exactly 1 from the origin, witnessing it is closed
        act = gallery_build("cube_coordinatewise_action")
        rep = verify_partition(act, cfg, epsilon=1.0)
        assert rep.passed
        assert rep.info["base_min_distance_to_center"] == pytest.approx(1.0, abs=1e-9)

    def test_default_epsilon_recorded(self, cfg):
        act = disk_action()
        rep = verify_partition(act, cfg)
        assert rep.info["epsilon"] == pytest.approx(default_epsilon(act, cfg))


class TestConeHomeomorphism:
    def test_disk_roundtrip(self, cfg):
        rep = verify_cone_homeomorphism(disk_action(), 1.0, cfg)
        assert rep.passed
        assert rep.record("roundtrip").max_violation <= 1e-9

    def test_plane_window_expanding_variant(self, cfg):
        act = gallery_build("disk_radial_action", {"r": 10.0})
        rep = verify_cone_homeomorphism(act, 1.0, cfg)
        assert rep.passed

    def test_fixed_ring_fails_precondition(self, cfg):
        with pytest.raises(PreconditionError):
            verify_cone_homeomorphism(gallery_build("fixed_ring_action"), 2.7, cfg)


class TestMetricCone:
    def test_disk_pullback_is_exact(self, cfg):
        rep = verify_metric_cone(disk_action(), 1.0, cfg)
        assert rep.passed
        assert rep.record("exact_dilation_pullback").max_violation <= 1e-8

    def test_square_window_sup_metric(self, cfg):
        space = Space.analytic("square", "sup", 2, Window.box([-1, -1], [1, 1]),
                               basepoint=[0.0, 0.0])
        x0 = space.basepoint
        act = RadialAction(space=space, act=lambda a, p: x0 + float(a) * (p - x0),
                           name="square_radial")
        rep = verify_metric_cone(act, 0.9, cfg)
        assert rep.passed

    def test_parabolic_action_pullback(self, cfg):
        rep = verify_metric_cone(parabolic_action(), 0.9, cfg)
        assert rep.passed

    def test_fixed_ring_fails_precondition(self, cfg):
        with pytest.raises(PreconditionError):
            verify_metric_cone(gallery_build("fixed_ring_action"), 2.7, cfg)
