"""Wingbeat gait generation and phase metrics.

One wingbeat is one full crank revolution at constant rate 2*pi/period. The
gait is the time series of plunge angle (shoulder-to-wingtip ray above the
ground axis, unwrapped), extension ratio (reach normalized by the sweep
maximum), and membrane area (shoelace over the wing polygon markers).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeometryError,
    GaitError,
    NoStrokeReversalError,
    ZeroReachError,
)
from .geometry import Point2
from .kinematics import (
    Branch,
    Configuration,
    DEFAULT_SETTINGS,
    PoseArrays,
    SolveSettings,
    marker_world,
    sweep_arrays,
)
from .mechanism import Mechanism


@dataclass(frozen=True)
class GaitTrajectory:
    """Sampled wingbeat, columnar. Samples are endpoint-exclusive: t_k = k*T/N,
    crank_k = theta0 + 2*pi*k/N, so the series is periodic."""

    period: float
    t: np.ndarray
    crank: np.ndarray
    plunge: np.ndarray
    extension: np.ndarray
    area: np.ndarray
    wingtip: np.ndarray  # (N, 2)

    @property
    def samples(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return self.period / self.samples


@dataclass(frozen=True)
class GaitMetrics:
    plunge_amplitude: float
    extension_range: tuple[float, float]
    area_ratio_up_down: float
    phase_lag: float
    min_transmission_angle: float | None = None


def polygon_area(points: np.ndarray) -> float:
    """Unsigned shoelace area of a polygon given as an (V, 2) array."""
    x, y = points[:, 0], points[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def wing_area(m: Mechanism, c: Configuration) -> float:
    """Membrane area traced by the wing-polygon markers in the world frame."""
    if len(m.wing_polygon) < 3:
        raise GaitError("mechanism has no wing polygon", code="BAD_WING_POLYGON")
    pts = np.array([marker_world(m, c, lid, mk).as_array() for lid, mk in m.wing_polygon])
    return polygon_area(pts)


def _shoulder_tip(m: Mechanism, c: Configuration) -> tuple[Point2, Point2]:
    if m.shoulder is None or m.wingtip is None:
        raise GaitError("mechanism does not declare shoulder/wingtip markers", code="DEGENERATE")
    s = marker_world(m, c, *m.shoulder)
    w = marker_world(m, c, *m.wingtip)
    return s, w


def plunge_angle(m: Mechanism, c: Configuration) -> float:
    """Angle of the shoulder-to-wingtip ray above the ground x axis.

    Downstroke is decreasing plunge by convention.
    """
    s, w = _shoulder_tip(m, c)
    v = w - s
    if v.norm() < 1e-12:
        raise DegenerateGeometryError("shoulder and wingtip coincide")
    return math.atan2(v.y, v.x)


def reach(m: Mechanism, c: Configuration) -> float:
    s, w = _shoulder_tip(m, c)
    return (w - s).norm()


def extension_ratio(m: Mechanism, c: Configuration, max_reach: float) -> float:
    """Reach normalized by the sweep maximum (1 at the most-extended sample)."""
    if max_reach <= 0.0:
        raise ZeroReachError("maximum reach over the sweep is zero")
    return reach(m, c) / max_reach


def _gait_from_arrays(m: Mechanism, pa: PoseArrays, period: float, t: np.ndarray) -> GaitTrajectory:
    tip = pa.marker_world(m, m.wingtip)
    sh = pa.marker_world(m, m.shoulder)
    d = tip - sh
    reach_series = np.hypot(d[:, 0], d[:, 1])
    max_reach = float(reach_series.max())
    if max_reach <= 0.0:
        raise ZeroReachError("maximum reach over the sweep is zero")
    if reach_series.min() < 1e-12:
        raise DegenerateGeometryError("shoulder and wingtip coincide during the sweep")
    plunge = np.unwrap(np.arctan2(d[:, 1], d[:, 0]))
    poly = np.stack([pa.marker_world(m, ref) for ref in m.wing_polygon], axis=1)  # (N, V, 2)
    x, y = poly[:, :, 0], poly[:, :, 1]
    area = 0.5 * np.abs(np.einsum("ij,ij->i", x, np.roll(y, -1, axis=1))
                        - np.einsum("ij,ij->i", y, np.roll(x, -1, axis=1)))
    return GaitTrajectory(period, t, pa.thetas, plunge, reach_series / max_reach, area, tip)


def generate_gait(m: Mechanism, period: float, samples: int,
                  settings: SolveSettings = DEFAULT_SETTINGS,
                  guess: Configuration | None = None,
                  branch: Branch = Branch.OPEN,
                  theta0: float = 0.0) -> GaitTrajectory:
    """Sweep one crank revolution at constant rate and extract gait series.

    Raises on sweep failure (the mechanism must assemble over the whole
    revolution to have a wingbeat).
    """
    if samples < 8:
        raise ValueError("samples must be >= 8")
    if period <= 0.0:
        raise ValueError("period must be positive")
    if m.shoulder is None or m.wingtip is None or len(m.wing_polygon) < 3:
        raise GaitError("mechanism must declare shoulder, wingtip and wing polygon",
                        code="DEGENERATE")
    t = np.arange(samples) * (period / samples)
    thetas = theta0 + 2.0 * math.pi * np.arange(samples) / samples
    pa = sweep_arrays(m, thetas, settings, guess, branch)
    if pa.failed_at is not None:
        raise GaitError(
            f"sweep failed at step {pa.failed_at} ({pa.error}); "
            "mechanism does not complete a wingbeat", code=pa.error or "SWEEP_FAILED")
    return _gait_from_arrays(m, pa, period, t)


def stroke_phases(plunge: np.ndarray) -> np.ndarray:
    """Per-sample stroke sign: +1 upstroke (plunge increasing), -1 downstroke.

    Uses periodic central differences with single-sample flickers removed by a
    3-sample majority filter.
    """
    dp = np.roll(plunge, -1) - np.roll(plunge, 1)
    sign = np.where(dp >= 0.0, 1, -1)
    prev_s, next_s = np.roll(sign, 1), np.roll(sign, -1)
    flicker = (sign != prev_s) & (sign != next_s)
    return np.where(flicker, prev_s, sign)


def gait_metrics(gt: GaitTrajectory, transmission: np.ndarray | None = None) -> GaitMetrics:
    """Phase metrics of a sampled wingbeat.

    area_ratio_up_down is mean membrane area over the upstroke divided by the
    mean over the downstroke; phase_lag is the crank angle from mid-upstroke
    to the extension minimum, wrapped to (-pi, pi].
    """
    if gt.samples < 8:
        raise ValueError("need >= 8 samples for metrics")
    plunge = gt.plunge
    amp = 0.5 * float(plunge.max() - plunge.min())
    sign = stroke_phases(plunge)
    up = sign > 0
    down = ~up
    if up.all() or down.all():
        raise NoStrokeReversalError("plunge is monotone over the wingbeat; not a flapping gait")
    ratio = float(gt.area[up].mean() / gt.area[down].mean())

    ext_min_idx = int(np.argmin(gt.extension))
    # mid-upstroke: middle sample of the longest contiguous upstroke run
    # (the series is periodic, so scan doubled indices)
    runs = _contiguous_runs(up)
    start, length = max(runs, key=lambda r: r[1])
    mid_idx = (start + length // 2) % gt.samples
    lag = gt.crank[ext_min_idx] - gt.crank[mid_idx]
    lag = (lag + math.pi) % (2.0 * math.pi) - math.pi
    mu_min = float(np.min(transmission)) if transmission is not None else None
    return GaitMetrics(amp, (float(gt.extension.min()), float(gt.extension.max())),
                       ratio, float(lag), mu_min)


def _contiguous_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """(start, length) of every True run in a periodic boolean series."""
    n = len(mask)
    if mask.all():
        return [(0, n)]
    doubled = np.concatenate([mask, mask])
    runs = []
    i = 0
    while i < n:
        if doubled[i] and not doubled[i - 1 if i > 0 else n - 1]:
            j = i
            while j < 2 * n and doubled[j]:
                j += 1
            runs.append((i, j - i))
            i = j
        else:
            i += 1
    return runs


def retraction_time(gt: GaitTrajectory, tol: float = 1e-12) -> float:
    """Duration of the longest contiguous phase with extension decreasing."""
    d_ext = np.roll(gt.extension, -1) - gt.extension
    retracting = d_ext < -tol
    runs = _contiguous_runs(retracting)
    if not runs:
        return 0.0
    return max(length for _, length in runs) * gt.dt
