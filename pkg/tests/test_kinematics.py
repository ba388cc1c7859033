"""Closed-form and Newton solvers, sweeps, velocities, transmission angles."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flapkin.geometry import Point2, Pose
from flapkin.kinematics import (
    Branch,
    Configuration,
    SolveSettings,
    assemble,
    loop_residual,
    marker_world,
    rocker_angle,
    solve_fourbar,
    sweep,
    sweep_arrays,
    transmission_angle,
    transmission_angle_at,
    velocities,
)
from flapkin.mechanism import FourBar, Link, LinkRole, fourbar_mechanism

from conftest import random_crank_rocker

# law-of-cosines oracle for (6, 2, 5, 5) at theta = 0: d = 4,
# beta = arccos((c^2 + d^2 - b^2) / (2cd)) = arccos(0.4), rocker = pi - beta
ROCKER_6255_T0 = math.pi - math.acos(0.4)
# cos(mu) = (b^2 + c^2 - d^2) / (2bc) = 0.68
MU_6255_T0 = math.acos(0.68)


def bisect_rocker(fb: FourBar, theta: float, lo: float, hi: float) -> float:
    """Independent oracle: bisection on the loop-closure residual in psi."""
    ax, ay = fb.a * math.cos(theta), fb.a * math.sin(theta)

    def f(psi):
        bx = fb.g + fb.c * math.cos(psi)
        by = fb.c * math.sin(psi)
        return math.hypot(bx - ax, by - ay) - fb.b

    flo, fhi = f(lo), f(hi)
    assert flo * fhi < 0, "bracket does not straddle the root"
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if flo * f(mid) <= 0:
            hi = mid
        else:
            lo, flo = mid, f(mid)
    return 0.5 * (lo + hi)


class TestClosedForm:
    def test_rocker_oracle_theta0(self, fb_example):
        c = solve_fourbar(fb_example, 0.0)
        assert rocker_angle(c) == pytest.approx(ROCKER_6255_T0, abs=1e-10)

    def test_rocker_oracle_theta90_bisection(self, fb_example):
        c = solve_fourbar(fb_example, math.pi / 2)
        psi_ref = bisect_rocker(fb_example, math.pi / 2, 1.0, 2.8)
        assert rocker_angle(c) == pytest.approx(psi_ref, abs=1e-9)

    def test_parallelogram_theta50(self):
        fb = FourBar(4, 2, 4, 2)
        c = solve_fourbar(fb, math.radians(50.0), Branch.OPEN)
        assert rocker_angle(c) == pytest.approx(math.radians(50.0), abs=1e-12)
        assert c.pose("coupler").angle == pytest.approx(0.0, abs=1e-12)

    def test_residual_postcondition(self, fb_example, fb_mech):
        rng = np.random.default_rng(7)
        for theta in rng.uniform(0, 2 * math.pi, 16):
            c = solve_fourbar(fb_example, float(theta))
            scale = sum(fb_example.lengths)
            assert np.linalg.norm(loop_residual(fb_mech, c)) <= 1e-12 * scale

    def test_residual_lipschitz_in_translation(self, fb_example, fb_mech):
        c = solve_fourbar(fb_example, 0.3)
        r0 = np.linalg.norm(loop_residual(fb_mech, c))
        p = c.pose("coupler")
        poses = dict(c.poses)
        poses["coupler"] = Pose(Point2(p.origin.x, p.origin.y + 1e-3), p.angle)
        c2 = Configuration(c.crank_angle, poses, c.branch)
        r1 = np.linalg.norm(loop_residual(fb_mech, c2))
        assert abs(r1 - r0) <= 2e-3


class TestAssemble:
    def test_exact_guess_returned_unchanged(self, fb_example, fb_mech):
        guess = solve_fourbar(fb_example, 0.8)
        c = assemble(fb_mech, 0.8, guess=guess)
        for lid in fb_mech.link_ids:
            assert c.pose(lid).angle == pytest.approx(guess.pose(lid).angle, abs=1e-12)

    def test_perturbed_guess_matches_oracle(self, fb_example, fb_mech):
        rng = np.random.default_rng(3)
        for theta in rng.uniform(0, 2 * math.pi, 8):
            ref = solve_fourbar(fb_example, float(theta))
            poses = {}
            for lid, p in ref.poses.items():
                if lid == fb_mech.ground:
                    poses[lid] = p
                    continue
                da = rng.uniform(-0.1, 0.1)
                poses[lid] = Pose(Point2(p.origin.x + rng.uniform(-0.05, 0.05),
                                         p.origin.y + rng.uniform(-0.05, 0.05)),
                                  p.angle + da)
            guess = Configuration(ref.crank_angle, poses, ref.branch)
            c = assemble(fb_mech, float(theta), guess=guess)
            for lid in ("crank", "coupler", "rocker"):
                assert abs(c.pose(lid).angle - ref.pose(lid).angle) <= 1e-8

    def test_two_stage_chain_residual(self, armwing):
        c = assemble(armwing, math.radians(30.0))
        assert np.linalg.norm(loop_residual(armwing, c)) <= 1e-10


class TestSweep:
    def test_crank_rocker_continuity(self, fb_mech):
        res = sweep(fb_mech, 0.0, 2 * math.pi, 360)
        assert res.failed_at is None and len(res.configurations) == 360
        rockers = np.array([rocker_angle(c) for c in res.configurations])
        assert np.abs(np.diff(rockers)).max() < 0.2
        for c in res.configurations[::30]:
            assert np.linalg.norm(loop_residual(fb_mech, c)) <= 1e-9

    def test_non_grashof_fails_past_dead_center(self):
        m = fourbar_mechanism(FourBar(6, 3, 2, 4))
        res = sweep(m, 0.0, 2 * math.pi, 360)
        assert res.failed_at is not None
        assert len(res.configurations) == res.failed_at

    def test_degenerate_range(self, fb_mech):
        res = sweep(fb_mech, 0.0, 0.0, 2)
        a, b = res.configurations
        for lid in fb_mech.link_ids:
            assert a.pose(lid).angle == b.pose(lid).angle

    def test_steps_below_two_rejected(self, fb_mech):
        with pytest.raises(ValueError):
            sweep(fb_mech, 0.0, 1.0, 1)

    def test_crank_angles_unwrapped(self, fb_mech):
        thetas = np.linspace(0, 2 * math.pi, 90)
        pa = sweep_arrays(fb_mech, thetas)
        crank = pa.angles[pa.index("crank")]
        assert np.allclose(np.diff(crank) > 0, True)
        assert crank[-1] == pytest.approx(2 * math.pi, abs=1e-9)


class TestVelocities:
    def test_parallelogram_one_to_one(self):
        m = fourbar_mechanism(FourBar(4, 2, 4, 2))
        c = solve_fourbar(FourBar(4, 2, 4, 2), 0.7)
        vel = velocities(m, c, 2.5)
        assert vel["rocker"][1] == pytest.approx(2.5, abs=1e-9)
        assert vel["crank"][1] == pytest.approx(2.5, abs=1e-12)

    def test_zero_rate_zero_velocity(self, fb_example, fb_mech):
        c = solve_fourbar(fb_example, 1.1)
        vel = velocities(fb_mech, c, 0.0)
        for v, w in vel.values():
            assert v.norm() == pytest.approx(0.0, abs=1e-14) and w == 0.0

    def test_finite_difference_oracle(self, fb_example, fb_mech):
        h = 1e-6
        for theta in (0.4, 1.3, 2.9, 4.4):
            c = solve_fourbar(fb_example, theta)
            vel = velocities(fb_mech, c, 1.0)
            cm = solve_fourbar(fb_example, theta - h)
            cp = solve_fourbar(fb_example, theta + h)
            for lid in ("coupler", "rocker"):
                w_fd = (cp.pose(lid).angle - cm.pose(lid).angle) / (2 * h)
                if abs(w_fd) > 1e-6:
                    assert vel[lid][1] == pytest.approx(w_fd, rel=1e-4)


class TestTransmission:
    def test_oracle_theta0(self, fb_example):
        c = solve_fourbar(fb_example, 0.0)
        assert transmission_angle(fb_example, c) == pytest.approx(MU_6255_T0, abs=1e-10)

    def test_parallelogram_theta90(self):
        fb = FourBar(4, 2, 4, 2)
        c = solve_fourbar(fb, math.pi / 2)
        assert transmission_angle(fb, c) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_folded_to_first_quadrant(self, fb_example, fb_mech):
        for theta in np.linspace(0, 2 * math.pi, 40):
            c = solve_fourbar(fb_example, float(theta))
            mu = transmission_angle(fb_example, c)
            assert 0.0 <= mu <= math.pi / 2 + 1e-12
            assert transmission_angle_at(fb_mech, c, "j_b") == pytest.approx(mu, abs=1e-9)


class TestMarkerWorld:
    def test_ground_marker_unchanged(self, fb_mech, fb_example):
        c = solve_fourbar(fb_example, 0.5)
        p = marker_world(fb_mech, c, "ground", "tip")
        assert (p.x, p.y) == (6.0, 0.0)

    def test_marker_at_origin_is_link_origin(self, fb_mech, fb_example):
        c = solve_fourbar(fb_example, 0.5)
        p = marker_world(fb_mech, c, "coupler", "origin")
        o = c.pose("coupler").origin
        assert (p.x, p.y) == (o.x, o.y)

    def test_rotation_identity(self):
        link = Link("l", {"origin": Point2(0, 0), "m": Point2(1, 0)})
        c = Configuration(0.0, {"l": Pose(Point2(0, 0), math.pi / 2)}, Branch.OPEN)
        from flapkin.mechanism import Mechanism
        m = Mechanism((Link("ground", {"origin": Point2(0, 0)}, LinkRole.GROUND), link),
                      (), "ground")
        p = marker_world(m, c, "l", "m")
        assert p.x == pytest.approx(0.0, abs=1e-15) and p.y == pytest.approx(1.0)


class TestProperties:
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), lam=st.floats(1e-2, 1e2),
           theta=st.floats(0.0, 2 * math.pi))
    def test_scale_equivariance(self, seed, lam, theta):
        fb = random_crank_rocker(np.random.default_rng(seed))
        g, a, b, c = fb.lengths
        cp = fb.coupler_point
        fb2 = FourBar(lam * g, lam * a, lam * b, lam * c,
                      coupler_point=Point2(lam * cp.x, lam * cp.y))
        c1 = solve_fourbar(fb, theta)
        c2 = solve_fourbar(fb2, theta)
        for lid in ("crank", "coupler", "rocker"):
            assert c2.pose(lid).angle == pytest.approx(c1.pose(lid).angle, abs=1e-9)
            o1, o2 = c1.pose(lid).origin, c2.pose(lid).origin
            assert o2.x == pytest.approx(lam * o1.x, rel=1e-9, abs=1e-12)
            assert o2.y == pytest.approx(lam * o1.y, rel=1e-9, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(theta=st.floats(0.0, 2 * math.pi), phi=st.floats(-math.pi, math.pi))
    def test_frame_invariance(self, theta, phi):
        import dataclasses

        fb_example = FourBar(6.0, 2.0, 5.0, 5.0, coupler_point=Point2(2.5, 1.5))
        fb_mech = fourbar_mechanism(fb_example)
        g = fb_example.g
        ground = Link("ground", {"origin": Point2(0, 0),
                                 "tip": Point2(g * math.cos(phi), g * math.sin(phi))},
                      LinkRole.GROUND)
        m2 = dataclasses.replace(fb_mech, links=(ground,) + fb_mech.links[1:])
        pa1 = sweep_arrays(fb_mech, np.array([theta, theta + 0.1]))
        pa2 = sweep_arrays(m2, np.array([theta + phi, theta + phi + 0.1]))
        assert pa1.failed_at is None and pa2.failed_at is None
        R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        for lid in ("crank", "coupler", "rocker"):
            w1 = pa1.marker_world(fb_mech, (lid, "tip"))
            w2 = pa2.marker_world(m2, (lid, "tip"))
            assert np.allclose(w2, w1 @ R.T, atol=1e-8)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_closure_random_crank_rockers(self, seed):
        rng = np.random.default_rng(seed)
        fb = random_crank_rocker(rng)
        m = fourbar_mechanism(fb)
        settings_ = SolveSettings(tolerance=1e-10)
        res = sweep(m, 0.0, 2 * math.pi, 64, settings_)
        assert res.failed_at is None
        for c in res.configurations[::8]:
            assert np.linalg.norm(loop_residual(m, c)) <= settings_.tolerance * sum(fb.lengths)


class TestSettings:
    def test_bad_tolerance_rejected(self):
        with pytest.raises(ValueError):
            SolveSettings(tolerance=0.0)

    def test_bad_iterations_rejected(self):
        with pytest.raises(ValueError):
            SolveSettings(max_iterations=0)
