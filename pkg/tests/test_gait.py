"""Wingbeat gait generation, polygon areas, stroke metrics and timing."""
from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from flapkin.errors import GaitError, NoStrokeReversalError
from flapkin.gait import (
    GaitTrajectory,
    gait_metrics,
    generate_gait,
    plunge_angle,
    polygon_area,
    retraction_time,
    stroke_phases,
    wing_area,
)
from flapkin.geometry import Point2, Pose
from flapkin.kinematics import Branch, Configuration, sweep_arrays
from flapkin.mechanism import FourBar, Link, LinkRole, Mechanism, fourbar_mechanism

from conftest import make_plunge_gait


def parallelogram_wing() -> Mechanism:
    m = fourbar_mechanism(FourBar(4, 2, 4, 2))
    return dataclasses.replace(
        m, shoulder=("ground", "tip"), wingtip=("rocker", "tip"),
        wing_polygon=(("ground", "origin"), ("ground", "tip"), ("rocker", "tip")))


class TestPolygonArea:
    def test_unit_square(self):
        sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        assert polygon_area(sq) == 1.0

    def test_triangle(self):
        tri = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
        assert polygon_area(tri) == 0.5

    def test_collinear_zero(self):
        line = np.array([[0, 0], [1, 1], [2, 2]], dtype=float)
        assert polygon_area(line) == 0.0

    def test_wing_area_matches_fan_triangulation(self, armwing):
        thetas = np.linspace(0, 2 * math.pi, 24)
        pa = sweep_arrays(armwing, thetas)
        for k in range(0, 24, 4):
            c = pa.configuration(k)
            a = wing_area(armwing, c)
            from flapkin.kinematics import marker_world
            pts = [marker_world(armwing, c, lid, mk).as_array()
                   for lid, mk in armwing.wing_polygon]
            tri = 0.0
            for i in range(1, len(pts) - 1):
                u, v = pts[i] - pts[0], pts[i + 1] - pts[0]
                tri += 0.5 * (u[0] * v[1] - u[1] * v[0])
            tri = abs(tri)
            assert a == pytest.approx(tri, rel=1e-12, abs=1e-18)


class TestPlunge:
    def _static(self, tip: Point2) -> tuple[Mechanism, Configuration]:
        ground = Link("ground", {"origin": Point2(0, 0), "s": Point2(0, 0), "w": tip},
                      LinkRole.GROUND)
        m = Mechanism((ground,), (), "ground", shoulder=("ground", "s"),
                      wingtip=("ground", "w"))
        c = Configuration(0.0, {"ground": Pose(Point2(0, 0), 0.0)}, Branch.OPEN)
        return m, c

    def test_tip_above_shoulder(self):
        m, c = self._static(Point2(0.0, 1.0))
        assert plunge_angle(m, c) == pytest.approx(math.pi / 2)

    def test_tip_along_x(self):
        m, c = self._static(Point2(1.0, 0.0))
        assert plunge_angle(m, c) == 0.0

    def test_tip_below_negative(self):
        m, c = self._static(Point2(0.5, -0.5))
        assert plunge_angle(m, c) < 0.0


class TestGenerateGait:
    def test_parallelogram_plunge_tracks_crank(self):
        gt = generate_gait(parallelogram_wing(), 1.0, 64)
        assert np.allclose(gt.plunge, gt.crank, atol=1e-9)
        assert np.allclose(gt.extension, 1.0, atol=1e-12)

    def test_sample_spacing(self, armwing):
        gt = generate_gait(armwing, 0.1, 100)
        assert gt.dt == pytest.approx(1e-3)
        assert np.allclose(np.diff(gt.t), 1e-3)
        assert gt.t[0] == 0.0 and gt.t[-1] < 0.1

    def test_crank_spans_one_revolution(self, armwing):
        gt = generate_gait(armwing, 1.0, 64)
        assert gt.crank[0] == 0.0
        assert gt.crank[-1] == pytest.approx(2 * math.pi * 63 / 64)

    def test_extension_bounds_and_normalization(self, armwing):
        gt = generate_gait(armwing, 1.0, 128)
        assert gt.extension.min() >= 0.0
        assert gt.extension.max() == 1.0

    def test_area_nonnegative(self, armwing):
        gt = generate_gait(armwing, 1.0, 64)
        assert (gt.area >= 0.0).all()

    def test_missing_wing_declaration_raises(self, fb_example):
        m = fourbar_mechanism(fb_example)
        m = dataclasses.replace(m, shoulder=None)
        with pytest.raises(GaitError):
            generate_gait(m, 1.0, 32)

    def test_extension_min_during_upstroke(self, armwing):
        gt = generate_gait(armwing, 1.0, 256)
        sign = stroke_phases(gt.plunge)
        assert sign[int(np.argmin(gt.extension))] > 0


class TestMetrics:
    def test_period_invariance(self, armwing):
        a = gait_metrics(generate_gait(armwing, 0.1, 128))
        b = gait_metrics(generate_gait(armwing, 1.0, 128))
        assert a.plunge_amplitude == b.plunge_amplitude
        assert a.extension_range == b.extension_range
        assert a.area_ratio_up_down == b.area_ratio_up_down
        assert a.phase_lag == b.phase_lag

    def test_sample_count_convergence(self, armwing):
        a = gait_metrics(generate_gait(armwing, 1.0, 256))
        b = gait_metrics(generate_gait(armwing, 1.0, 512))
        assert a.plunge_amplitude == pytest.approx(b.plunge_amplitude, rel=0.01)
        assert a.extension_range[0] == pytest.approx(b.extension_range[0], rel=0.01)
        assert a.extension_range[1] == pytest.approx(b.extension_range[1], rel=0.01)
        assert a.area_ratio_up_down == pytest.approx(b.area_ratio_up_down, rel=0.01)

    def test_constant_area_ratio_one(self):
        gt = make_plunge_gait(samples=128, amplitude=0.4, mod_depth=0.0)
        assert gait_metrics(gt).area_ratio_up_down == pytest.approx(1.0, abs=1e-12)

    def test_sign_modulated_area_ratio(self):
        samples = 128
        k = np.arange(samples)
        phase = 2 * math.pi * k / samples
        # half-sample shift keeps the plunge rate nonzero at every sample
        plunge = 0.5 * np.sin(phase + math.pi / samples)
        rate_sign = np.where(np.cos(phase + math.pi / samples) >= 0.0, 1.0, -1.0)
        area = 0.02 * (1.0 - 0.3 * rate_sign)   # smaller area on the upstroke
        gt = GaitTrajectory(1.0, k / samples, phase.copy(), plunge,
                            np.ones(samples), area,
                            np.stack([np.cos(plunge), np.sin(plunge)], axis=-1))
        assert gait_metrics(gt).area_ratio_up_down == pytest.approx(0.7 / 1.3, rel=1e-9)

    def test_no_stroke_reversal(self):
        samples = 64
        k = np.arange(samples)
        gt = GaitTrajectory(1.0, k / samples, 2 * math.pi * k / samples,
                            np.full(samples, 0.2), np.ones(samples),
                            np.full(samples, 0.01), np.ones((samples, 2)))
        with pytest.raises(NoStrokeReversalError):
            gait_metrics(gt)

    def test_crank_rocker_amplitude_half_rocker_swing(self, fb_example):
        m = fourbar_mechanism(fb_example)
        m = dataclasses.replace(m, shoulder=("ground", "tip"), wingtip=("rocker", "tip"))
        gt = generate_gait(m, 1.0, 512)
        thetas = gt.crank
        pa = sweep_arrays(m, thetas)
        rocker = pa.angles[pa.index("rocker")]
        half_swing = 0.5 * (rocker.max() - rocker.min())
        assert gait_metrics(gt).plunge_amplitude == pytest.approx(half_swing, rel=1e-6)


class TestStrokePhases:
    def test_flicker_filter(self):
        plunge = np.sin(2 * math.pi * np.arange(64) / 64)
        plunge[10] += 1e-12  # too small to flip the central difference
        sign = stroke_phases(plunge)
        assert set(np.unique(sign)) <= {-1, 1}
        flips = int((sign != np.roll(sign, 1)).sum())
        assert flips == 2


class TestRetraction:
    def test_known_run_length(self):
        samples = 100
        down = np.linspace(1.0, 0.5, 26)        # 25 strictly decreasing steps
        up = np.linspace(0.5, 1.0, 76)[1:]      # back up to 1.0
        ext = np.concatenate([down, up])
        k = np.arange(samples)
        gt = GaitTrajectory(0.1, k * 1e-3, 2 * math.pi * k / samples,
                            0.3 * np.sin(2 * math.pi * k / samples), ext,
                            np.full(samples, 0.01), np.ones((samples, 2)))
        assert retraction_time(gt) == pytest.approx(25 * gt.dt)

    def test_constant_extension_zero(self):
        gt = make_plunge_gait(samples=64)
        assert retraction_time(gt) == 0.0
