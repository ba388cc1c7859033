"""Pose solvers for planar linkages.

Two routes to a configuration:

* closed-form law-of-cosines construction for a single four-bar loop
  (vectorized over crank angles), and
* damped Newton iteration on the stacked joint-coincidence residuals for
  arbitrary single-DOF chains, with continuation along sweeps.

The crank coordinate theta is the world orientation of the crank link frame,
measured counter-clockwise; sweeps keep all angles unwrapped so they stay
continuous across +-pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    BranchAmbiguousError,
    ConvergenceError,
    KinematicsError,
    NotAssemblableError,
    SingularJacobianError,
    UnknownMarkerError,
)
from .geometry import IDENTITY_POSE, Point2, Pose, drot, fold_quadrant, rot
from .mechanism import FourBar, FourBarView, Mechanism, as_fourbar, fourbar_mechanism


class Branch(Enum):
    OPEN = "open"
    CROSSED = "crossed"


@dataclass(frozen=True)
class Configuration:
    """Pose of every link at a given crank angle. Ground pose is identity."""

    crank_angle: float
    poses: dict[str, Pose]
    branch: Branch | None = None

    def pose(self, link_id: str) -> Pose:
        return self.poses[link_id]


@dataclass(frozen=True)
class SolveSettings:
    tolerance: float = 1e-10
    max_iterations: int = 50

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


DEFAULT_SETTINGS = SolveSettings()


@dataclass
class PoseArrays:
    """Columnar sweep result: per-link origins (L,N,2) and angles (L,N)."""

    ids: list[str]
    thetas: np.ndarray
    origins: np.ndarray
    angles: np.ndarray
    failed_at: int | None = None
    error: str | None = None
    branch: Branch | None = None

    @property
    def n_solved(self) -> int:
        return len(self.thetas) if self.failed_at is None else self.failed_at

    def index(self, link_id: str) -> int:
        return self.ids.index(link_id)

    def configuration(self, k: int) -> Configuration:
        poses = {
            lid: Pose(Point2(self.origins[i, k, 0], self.origins[i, k, 1]), float(self.angles[i, k]))
            for i, lid in enumerate(self.ids)
        }
        return Configuration(float(self.thetas[k]), poses, self.branch)

    def configurations(self) -> list[Configuration]:
        return [self.configuration(k) for k in range(self.n_solved)]

    def marker_world(self, m: Mechanism, ref: tuple[str, str]) -> np.ndarray:
        """World path (N,2) of one marker across the sweep."""
        lid, mname = ref
        i = self.index(lid)
        p = m.link(lid).marker(mname)
        c, s = np.cos(self.angles[i]), np.sin(self.angles[i])
        out = np.empty_like(self.origins[i])
        out[:, 0] = self.origins[i, :, 0] + c * p.x - s * p.y
        out[:, 1] = self.origins[i, :, 1] + s * p.x + c * p.y
        return out


@dataclass(frozen=True)
class SweepResult:
    configurations: list[Configuration]
    failed_at: int | None = None
    error: str | None = None


def marker_world(m: Mechanism, c: Configuration, link_id: str, marker: str) -> Point2:
    """Rigid transform of a link-local marker by the solved link pose."""
    try:
        lk = m.link(link_id)
        p = lk.marker(marker)
    except KeyError as e:
        raise UnknownMarkerError(f"unknown link or marker: {link_id}.{marker}") from e
    return c.pose(link_id).transform(p)


def mechanism_scale(m: Mechanism) -> float:
    """Characteristic length: largest marker coordinate magnitude, floor 1."""
    s = 0.0
    for l in m.links:
        for p in l.markers.values():
            s = max(s, abs(p.x), abs(p.y))
    return max(s, 1.0)


# ---------------------------------------------------------------------------
# Closed-form four-bar


def _fourbar_angles(fb: FourBar, theta: np.ndarray, branch: Branch):
    """Rocker and coupler segment angles for crank segment angles theta,
    measured in the canonical frame (ground pivot at origin, ground along +x).

    Returns (psi, coupler_angle, ok_mask)."""
    g, a, b, c = fb.g, fb.a, fb.b, fb.c
    ax = a * np.cos(theta)
    ay = a * np.sin(theta)
    dx = ax - g
    dy = ay
    d = np.hypot(dx, dy)
    eps = 1e-12 * (g + a + b + c)
    ok = (d >= abs(b - c) - eps) & (d <= b + c + eps) & (d > eps)
    phi = np.arctan2(dy, dx)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_beta = np.clip((c * c + d * d - b * b) / (2.0 * c * d), -1.0, 1.0)
    beta = np.arccos(np.where(ok, cos_beta, 0.0))
    psi = phi - beta if branch is Branch.OPEN else phi + beta
    bx = g + c * np.cos(psi) - ax
    by = c * np.sin(psi) - ay
    coupler_angle = np.arctan2(by, bx)
    return psi, coupler_angle, ok


def solve_fourbar(fb: FourBar, theta: float, branch: Branch = Branch.OPEN) -> Configuration:
    """Exact closed-form pose of the canonical four-bar mechanism at crank
    angle theta. Raises NotAssemblableError past a dead center."""
    th = np.asarray([float(theta)])
    psi, mu, ok = _fourbar_angles(fb, th, branch)
    if not ok[0]:
        raise NotAssemblableError(
            f"four-bar {fb.lengths} cannot close at crank angle {theta:.6g} rad")
    a = float(fb.a)
    ax, ay = a * math.cos(theta), a * math.sin(theta)
    poses = {
        "ground": IDENTITY_POSE,
        "crank": Pose(Point2(0.0, 0.0), float(theta)),
        "coupler": Pose(Point2(ax, ay), float(mu[0])),
        "rocker": Pose(Point2(fb.g, 0.0), float(psi[0])),
    }
    return Configuration(float(theta), poses, branch)


def rocker_angle(c: Configuration) -> float:
    return c.pose("rocker").angle


def transmission_angle(fb: FourBar, c: Configuration) -> float:
    """Interior angle between coupler and rocker, folded into [0, pi/2]."""
    return fold_quadrant(c.pose("coupler").angle - c.pose("rocker").angle)


def _local_angle_len(m: Mechanism, link_id: str, from_marker: str, to_marker: str):
    lk = m.link(link_id)
    v = lk.marker(to_marker) - lk.marker(from_marker)
    return math.atan2(v.y, v.x), v.norm()


def _wrap_near(x: np.ndarray | float) -> np.ndarray | float:
    """Shift by a whole number of turns into (-pi, pi]; exact when already there."""
    return x - 2.0 * np.pi * np.round(x / (2.0 * np.pi))


def _continue_branches(psi_o, mu_o, psi_c, mu_c, branch: Branch):
    """Continuation-by-nearest-root over the two closed-form branches.

    Starts on the requested branch and at every step keeps whichever branch
    solution is angularly closest to the previous rocker angle; this tracks
    through change points (where the branches meet) without teleporting the
    rocker, and produces unwrapped angle series.
    """
    n = len(psi_o)
    psi = np.empty(n)
    mu = np.empty(n)
    if branch is Branch.CROSSED:
        psi[0], mu[0] = psi_c[0], mu_c[0]
    else:
        psi[0], mu[0] = psi_o[0], mu_o[0]
    d_prev = 0.0
    for k in range(1, n):
        d_o = _wrap_near(psi_o[k] - psi[k - 1])
        d_c = _wrap_near(psi_c[k] - psi[k - 1])
        # both branches stay continuous through a change point, so plain
        # nearest-root ties there; preferring the step closest to the previous
        # step (velocity continuation) keeps the same physical motion branch
        if abs(d_c - d_prev) < abs(d_o - d_prev):
            psi[k] = psi[k - 1] + d_c
            mu[k] = mu[k - 1] + _wrap_near(mu_c[k] - mu[k - 1])
            d_prev = d_c
        else:
            psi[k] = psi[k - 1] + d_o
            mu[k] = mu[k - 1] + _wrap_near(mu_o[k] - mu[k - 1])
            d_prev = d_o
    return psi, mu


def _fourbar_pose_arrays(m: Mechanism, view: FourBarView, thetas: np.ndarray,
                         branch: Branch) -> PoseArrays:
    """Vectorized closed-form sweep of a recognized four-bar loop, honoring
    arbitrary link-local frames and a ground link placed anywhere."""
    fb = view.fourbar
    act = m.joint(view.crank_joint)
    j_a = m.joint(view.coupler_joint)
    j_b = m.joint(view.follower_joint)
    j_g = m.joint(view.rocker_joint)

    def marker_of(j, lid):
        return j.marker_a if j.link_a == lid else j.marker_b

    gl = m.link(m.ground)
    O = gl.marker(marker_of(act, m.ground)).as_array()
    P2 = gl.marker(marker_of(j_g, m.ground)).as_array()
    gamma = math.atan2(P2[1] - O[1], P2[0] - O[0])

    d_crank, _ = _local_angle_len(m, view.crank, marker_of(act, view.crank), marker_of(j_a, view.crank))
    d_coupler, _ = _local_angle_len(m, view.coupler, marker_of(j_a, view.coupler), marker_of(j_b, view.coupler))
    d_rocker, _ = _local_angle_len(m, view.rocker, marker_of(j_g, view.rocker), marker_of(j_b, view.rocker))

    theta_seg = thetas + d_crank - gamma  # crank segment angle in ground-axis frame
    psi_o, mu_o, ok = _fourbar_angles(fb, theta_seg, Branch.OPEN)
    psi_c, mu_c, _ = _fourbar_angles(fb, theta_seg, Branch.CROSSED)
    failed_at = None
    if not ok.all():
        failed_at = int(np.argmin(ok))
    psi, mu = _continue_branches(psi_o, mu_o, psi_c, mu_c, branch)

    ids = [m.ground, view.crank, view.coupler, view.rocker]
    n = len(thetas)
    angles = np.zeros((4, n))
    origins = np.zeros((4, n, 2))
    angles[1] = thetas
    angles[2] = mu + gamma - d_coupler
    angles[3] = psi + gamma - d_rocker

    def place(i, anchor_world, local_marker):
        c, s = np.cos(angles[i]), np.sin(angles[i])
        origins[i, :, 0] = anchor_world[..., 0] - (c * local_marker.x - s * local_marker.y)
        origins[i, :, 1] = anchor_world[..., 1] - (s * local_marker.x + c * local_marker.y)

    crank_pin = m.link(view.crank).marker(marker_of(act, view.crank))
    place(1, O, crank_pin)
    # world position of the crank-coupler pin: its crank-local marker mapped by the crank pose
    ca, sa = np.cos(angles[1]), np.sin(angles[1])
    pA = m.link(view.crank).marker(marker_of(j_a, view.crank))
    A_world = np.stack([
        origins[1, :, 0] + ca * pA.x - sa * pA.y,
        origins[1, :, 1] + sa * pA.x + ca * pA.y,
    ], axis=-1)
    place(2, A_world, m.link(view.coupler).marker(marker_of(j_a, view.coupler)))
    place(3, P2, m.link(view.rocker).marker(marker_of(j_g, view.rocker)))

    err = None if failed_at is None else NotAssemblableError.code
    return PoseArrays(ids, thetas, origins, angles, failed_at, err, branch)


# ---------------------------------------------------------------------------
# General Newton solver


class ConstraintSystem:
    """Stacked joint-coincidence constraints plus the crank drive row.

    Unknowns are the (x, y, angle) of every non-ground link; the system is
    square exactly when the rigid skeleton has Gruebler mobility one.
    """

    def __init__(self, m: Mechanism):
        self.m = m
        self.moving = list(m.moving_link_ids())
        self.index = {lid: 3 * i for i, lid in enumerate(self.moving)}
        self.n = 3 * len(self.moving)
        act = m.actuated_joint()
        self.crank_link = act.other(m.ground) if act is not None else None
        self.rows = 2 * len(m.joints) + (1 if act is not None else 0)
        self._joints = []
        for j in m.joints:
            pa = m.link(j.link_a).marker(j.marker_a).as_array()
            pb = m.link(j.link_b).marker(j.marker_b).as_array()
            ia = self.index.get(j.link_a)
            ib = self.index.get(j.link_b)
            self._joints.append((ia, pa, ib, pb))

    def q_from(self, c: Configuration) -> np.ndarray:
        q = np.zeros(self.n)
        for lid, base in self.index.items():
            p = c.pose(lid)
            q[base] = p.origin.x
            q[base + 1] = p.origin.y
            q[base + 2] = p.angle
        return q

    def config_from(self, q: np.ndarray, theta: float, branch: Branch | None = None) -> Configuration:
        poses = {self.m.ground: IDENTITY_POSE}
        for lid, base in self.index.items():
            poses[lid] = Pose(Point2(float(q[base]), float(q[base + 1])), float(q[base + 2]))
        return Configuration(float(theta), poses, branch)

    def _world(self, q, idx, p):
        if idx is None:
            return p
        a = q[idx + 2]
        c, s = math.cos(a), math.sin(a)
        return np.array([q[idx] + c * p[0] - s * p[1], q[idx + 1] + s * p[0] + c * p[1]])

    def residual(self, q: np.ndarray, theta: float) -> np.ndarray:
        out = np.zeros(self.rows)
        r = 0
        for ia, pa, ib, pb in self._joints:
            out[r:r + 2] = self._world(q, ia, pa) - self._world(q, ib, pb)
            r += 2
        if self.crank_link is not None:
            out[r] = q[self.index[self.crank_link] + 2] - theta
        return out

    def jacobian(self, q: np.ndarray) -> np.ndarray:
        J = np.zeros((self.rows, self.n))
        r = 0
        for ia, pa, ib, pb in self._joints:
            if ia is not None:
                J[r, ia] = 1.0
                J[r + 1, ia + 1] = 1.0
                J[r:r + 2, ia + 2] = drot(q[ia + 2]) @ pa
            if ib is not None:
                J[r, ib] = -1.0
                J[r + 1, ib + 1] = -1.0
                J[r:r + 2, ib + 2] = -(drot(q[ib + 2]) @ pb)
            r += 2
        if self.crank_link is not None:
            J[r, self.index[self.crank_link] + 2] = 1.0
        return J


def initial_guess(m: Mechanism, theta: float) -> Configuration:
    """Breadth-first rigid placement: drop every link at orientation zero
    (crank at theta) translated so joint markers coincide along a spanning
    tree. Loop joints are generally left open; Newton closes them."""
    poses: dict[str, Pose] = {m.ground: IDENTITY_POSE}
    act = m.actuated_joint()
    crank_link = act.other(m.ground) if act is not None else None
    adj = m.adjacency()
    queue = [m.ground]
    while queue:
        lid = queue.pop(0)
        for j in adj[lid]:
            other = j.other(lid)
            if other in poses:
                continue
            anchor = poses[lid].transform(m.link(lid).marker(j.marker_a if j.link_a == lid else j.marker_b))
            local = m.link(other).marker(j.marker_b if j.link_b == other else j.marker_a)
            ang = theta if other == crank_link else 0.0
            c, s = math.cos(ang), math.sin(ang)
            origin = Point2(anchor.x - (c * local.x - s * local.y),
                            anchor.y - (s * local.x + c * local.y))
            poses[other] = Pose(origin, ang)
            queue.append(other)
    for l in m.links:  # disconnected links still get a pose
        poses.setdefault(l.id, IDENTITY_POSE)
    return Configuration(theta, poses)


def _place_two_points(m: Mechanism, link_id: str, q1_name: str, p1: np.ndarray,
                      q2_name: str, x: np.ndarray) -> Pose:
    """Pose of a link given world positions of two of its local markers."""
    lk = m.link(link_id)
    q1 = lk.marker(q1_name)
    q2 = lk.marker(q2_name)
    local = math.atan2(q2.y - q1.y, q2.x - q1.x)
    world = math.atan2(x[1] - p1[1], x[0] - p1[0])
    ang = world - local
    c, s = math.cos(ang), math.sin(ang)
    return Pose(Point2(p1[0] - (c * q1.x - s * q1.y), p1[1] - (s * q1.x + c * q1.y)), ang)


def _circle_intersections(p1: np.ndarray, r1: float, p2: np.ndarray, r2: float):
    """Both intersection points of two circles; tangent/clamped if disjoint."""
    d = float(np.linalg.norm(p2 - p1))
    if d < 1e-15:
        return []
    a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
    h_sq = r1 * r1 - a * a
    h = math.sqrt(h_sq) if h_sq > 0.0 else 0.0
    u = (p2 - p1) / d
    n = np.array([-u[1], u[0]])
    base = p1 + a * u
    if h == 0.0:
        return [base]
    return [base + h * n, base - h * n]


def bootstrap_candidates(m: Mechanism, theta: float, max_candidates: int = 16) -> list[Configuration]:
    """Closed-form starting guesses: place the crank at theta, then repeatedly
    resolve RR dyads by circle intersection, branching on each +-root.

    Candidates are ordered deterministically; links that no rule reaches are
    dropped at orientation zero (BFS placement) for Newton to sort out.
    """
    act = m.actuated_joint()
    base: dict[str, Pose] = {m.ground: IDENTITY_POSE}
    if act is not None:
        crank_link = act.other(m.ground)
        anchor = m.link(m.ground).marker(act.marker_a if act.link_a == m.ground else act.marker_b)
        local = m.link(crank_link).marker(act.marker_b if act.link_b == crank_link else act.marker_a)
        c, s = math.cos(theta), math.sin(theta)
        base[crank_link] = Pose(Point2(anchor.x - (c * local.x - s * local.y),
                                       anchor.y - (s * local.x + c * local.y)), theta)

    def world_marker(poses, lid, name):
        return poses[lid].transform(m.link(lid).marker(name)).as_array()

    def expand(poses: dict[str, Pose]) -> list[dict[str, Pose]]:
        unplaced = [l.id for l in m.links if l.id not in poses]
        if not unplaced:
            return [poses]
        # 1. a link pinned to two placed links: pose follows directly
        for lid in unplaced:
            anchors = []
            for j in m.joints:
                if j.link_a == lid and j.link_b in poses:
                    anchors.append((j.marker_a, world_marker(poses, j.link_b, j.marker_b)))
                elif j.link_b == lid and j.link_a in poses:
                    anchors.append((j.marker_b, world_marker(poses, j.link_a, j.marker_a)))
            if len(anchors) >= 2:
                (n1, p1), (n2, p2) = anchors[0], anchors[1]
                new = dict(poses)
                new[lid] = _place_two_points(m, lid, n1, p1, n2, p2)
                return expand(new)
        # 2. RR dyad: two unplaced links sharing a joint, each pinned once
        for j in m.joints:
            if j.link_a in poses or j.link_b in poses:
                continue
            sides = []
            for lid, shared_marker in ((j.link_a, j.marker_a), (j.link_b, j.marker_b)):
                if lid not in unplaced:
                    sides = []
                    break
                pin = None
                for jj in m.joints:
                    if jj is j:
                        continue
                    if jj.link_a == lid and jj.link_b in poses:
                        pin = (jj.marker_a, world_marker(poses, jj.link_b, jj.marker_b))
                    elif jj.link_b == lid and jj.link_a in poses:
                        pin = (jj.marker_b, world_marker(poses, jj.link_a, jj.marker_a))
                    if pin:
                        break
                if pin is None:
                    sides = []
                    break
                lk = m.link(lid)
                radius = (lk.marker(shared_marker) - lk.marker(pin[0])).norm()
                sides.append((lid, shared_marker, pin[0], pin[1], radius))
            if len(sides) == 2:
                (la, ma, na, pa_, ra), (lb, mb, nb, pb_, rb) = sides
                out = []
                for x in _circle_intersections(pa_, ra, pb_, rb):
                    new = dict(poses)
                    new[la] = _place_two_points(m, la, na, pa_, ma, x)
                    new[lb] = _place_two_points(m, lb, nb, pb_, mb, x)
                    out.extend(expand(new))
                    if len(out) >= max_candidates:
                        break
                if out:
                    return out[:max_candidates]
        # 3. fallback: hang one adjacent link at orientation zero
        for j in m.joints:
            for lid, other in ((j.link_a, j.link_b), (j.link_b, j.link_a)):
                if lid in unplaced and other in poses:
                    anchor = world_marker(poses, other,
                                          j.marker_b if j.link_b == other else j.marker_a)
                    local = m.link(lid).marker(j.marker_a if j.link_a == lid else j.marker_b)
                    new = dict(poses)
                    new[lid] = Pose(Point2(anchor[0] - local.x, anchor[1] - local.y), 0.0)
                    return expand(new)
        # disconnected leftovers
        new = dict(poses)
        for lid in unplaced:
            new[lid] = IDENTITY_POSE
        return [new]

    return [Configuration(theta, poses) for poses in expand(base)[:max_candidates]]


def assemble(m: Mechanism, theta: float, guess: Configuration | None = None,
             settings: SolveSettings = DEFAULT_SETTINGS) -> Configuration:
    """Newton-Raphson on the joint-coincidence residuals at fixed crank angle.

    Returns the root continuously reachable from the guess. Step halving (at
    most 20 times per iteration) guards against overshoot.
    """
    sys = ConstraintSystem(m)
    if sys.rows != sys.n:
        raise KinematicsError(
            f"constraint system is not square ({sys.rows} equations, {sys.n} unknowns); "
            "mechanism must be single-DOF with one actuated joint",
            code="MOBILITY_NOT_ONE")
    if guess is None:
        last_error: KinematicsError | None = None
        for candidate in bootstrap_candidates(m, theta):
            try:
                return assemble(m, theta, candidate, settings)
            except (ConvergenceError, SingularJacobianError) as e:
                last_error = e
        raise last_error or ConvergenceError(f"no bootstrap candidate converged at theta={theta:.6g}")
    q = sys.q_from(guess)
    fn = np.linalg.norm(sys.residual(q, theta))
    if fn <= settings.tolerance:
        return sys.config_from(q, theta, guess.branch)
    for _ in range(settings.max_iterations):
        J = sys.jacobian(q)
        F = sys.residual(q, theta)
        try:
            with np.errstate(all="ignore"):
                dq = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as e:
            raise SingularJacobianError(f"singular constraint Jacobian at theta={theta:.6g}") from e
        if not np.all(np.isfinite(dq)):
            raise SingularJacobianError(f"ill-conditioned constraint Jacobian at theta={theta:.6g}")
        step = 1.0
        for _ in range(20):
            qn = q + step * dq
            fn_new = np.linalg.norm(sys.residual(qn, theta))
            if fn_new < fn:
                break
            step *= 0.5
        else:
            sv = np.linalg.svd(J, compute_uv=False)
            if sv[-1] <= 1e-12 * sv[0]:
                raise SingularJacobianError(f"dead-center configuration at theta={theta:.6g}")
            raise ConvergenceError(f"Newton stalled at theta={theta:.6g}, residual {fn:.3e}")
        q, fn = qn, fn_new
        if fn <= settings.tolerance:
            base = sys.index.get(sys.crank_link) if sys.crank_link else None
            if base is not None:
                q[base + 2] = theta  # hold the drive coordinate exactly
            return sys.config_from(q, theta, guess.branch)
    raise ConvergenceError(
        f"no convergence after {settings.max_iterations} iterations at theta={theta:.6g}, "
        f"residual {fn:.3e}")


def _newton_sweep_arrays(m: Mechanism, thetas: np.ndarray, settings: SolveSettings,
                         guess: Configuration | None) -> PoseArrays:
    sys = ConstraintSystem(m)
    ids = [m.ground] + sys.moving
    n = len(thetas)
    origins = np.zeros((len(ids), n, 2))
    angles = np.zeros((len(ids), n))
    current = guess
    failed_at = None
    error = None
    for k, th in enumerate(thetas):
        try:
            current = assemble(m, float(th), current, settings)
        except (NotAssemblableError, ConvergenceError, SingularJacobianError) as e:
            failed_at, error = k, e.code
            break
        for i, lid in enumerate(ids):
            p = current.pose(lid)
            origins[i, k] = (p.origin.x, p.origin.y)
            angles[i, k] = p.angle
    return PoseArrays(ids, thetas, origins, angles, failed_at, error,
                      guess.branch if guess else None)


def sweep_arrays(m: Mechanism, thetas: np.ndarray, settings: SolveSettings = DEFAULT_SETTINGS,
                 guess: Configuration | None = None, branch: Branch = Branch.OPEN) -> PoseArrays:
    """Continuation sweep over an array of crank angles, columnar output.

    A single four-bar loop takes the vectorized closed-form route; any other
    chain runs Newton seeded step-by-step with the previous solution.
    """
    thetas = np.asarray(thetas, dtype=float)
    view = as_fourbar(m)
    if view is not None:
        if guess is not None:
            branch = _nearest_branch(m, view, thetas[0], guess)
        return _fourbar_pose_arrays(m, view, thetas, branch)
    return _newton_sweep_arrays(m, thetas, settings, guess)


def _nearest_branch(m: Mechanism, view: FourBarView, theta0: float, guess: Configuration) -> Branch:
    best, best_d = Branch.OPEN, math.inf
    target = guess.pose(view.rocker).angle
    for br in Branch:
        pa = _fourbar_pose_arrays(m, view, np.asarray([theta0]), br)
        if pa.failed_at is not None:
            continue
        d = abs((pa.angles[pa.index(view.rocker), 0] - target + math.pi) % (2 * math.pi) - math.pi)
        if abs(d - best_d) < 1e-12 and best_d < math.inf:
            raise BranchAmbiguousError("both branches equidistant from guess (change point); "
                                       "pass an explicit branch")
        if d < best_d:
            best, best_d = br, d
    return best


def sweep(m: Mechanism, theta_start: float, theta_end: float, steps: int,
          settings: SolveSettings = DEFAULT_SETTINGS, guess: Configuration | None = None,
          branch: Branch = Branch.OPEN) -> SweepResult:
    """Solve `steps` configurations over [theta_start, theta_end] (inclusive)
    with continuation. On failure, partial results plus the failing index."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    thetas = np.linspace(theta_start, theta_end, steps)
    pa = sweep_arrays(m, thetas, settings, guess, branch)
    return SweepResult(pa.configurations(), pa.failed_at, pa.error)


def loop_residual(m: Mechanism, c: Configuration) -> np.ndarray:
    """Coincidence error (2 entries) of every non-spanning-tree joint."""
    tree_links = {m.ground}
    non_tree = []
    remaining = list(m.joints)
    grew = True
    while grew:
        grew = False
        still = []
        for j in remaining:
            if j.link_a in tree_links and j.link_b in tree_links:
                still.append(j)
            elif j.link_a in tree_links or j.link_b in tree_links:
                tree_links.add(j.link_a)
                tree_links.add(j.link_b)
                grew = True
            else:
                still.append(j)
        remaining = still
    non_tree = [j for j in remaining if j.link_a in tree_links and j.link_b in tree_links]
    out = np.zeros(2 * len(non_tree))
    for i, j in enumerate(non_tree):
        wa = marker_world(m, c, j.link_a, j.marker_a)
        wb = marker_world(m, c, j.link_b, j.marker_b)
        out[2 * i] = wa.x - wb.x
        out[2 * i + 1] = wa.y - wb.y
    return out


def constraint_residual(m: Mechanism, c: Configuration) -> np.ndarray:
    """All joint-coincidence errors (no crank row), for diagnostics."""
    sys = ConstraintSystem(m)
    q = sys.q_from(c)
    r = sys.residual(q, c.crank_angle)
    return r[:2 * len(m.joints)]


def velocities(m: Mechanism, c: Configuration, crank_rate: float,
               rcond_floor: float = 1e-10) -> dict[str, tuple[Point2, float]]:
    """Link velocities from the time-differentiated constraints.

    Returns link id -> (origin linear velocity, angular velocity); the crank
    angular velocity equals crank_rate by construction.
    """
    sys = ConstraintSystem(m)
    if sys.rows != sys.n:
        raise KinematicsError("velocity analysis needs a square constraint system",
                              code="MOBILITY_NOT_ONE")
    q = sys.q_from(c)
    J = sys.jacobian(q)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= rcond_floor * sv[0]:
        raise SingularJacobianError("constraint Jacobian is singular (dead center)")
    b = np.zeros(sys.rows)
    b[-1] = crank_rate
    qdot = np.linalg.solve(J, b)
    out = {m.ground: (Point2(0.0, 0.0), 0.0)}
    for lid, base in sys.index.items():
        out[lid] = (Point2(float(qdot[base]), float(qdot[base + 1])), float(qdot[base + 2]))
    return out


def relative_joint_angle(m: Mechanism, c: Configuration, joint_id: str) -> float:
    """Orientation of link_b minus orientation of link_a at a joint."""
    j = m.joint(joint_id)
    return c.pose(j.link_b).angle - c.pose(j.link_a).angle


def _direction_at_joint(m: Mechanism, c: Configuration, link_id: str, j) -> float:
    lk = m.link(link_id)
    pj = lk.marker(j.marker_a if j.link_a == link_id else j.marker_b)
    v = pj - lk.marker("origin")
    pose = c.pose(link_id)
    if v.norm() < 1e-12:
        return pose.angle
    return pose.angle + math.atan2(v.y, v.x)


def transmission_angle_at(m: Mechanism, c: Configuration, joint_id: str) -> float:
    """Folded angle between the two link directions meeting at a joint.

    A link's direction is taken from its origin marker toward the joint
    marker (its x axis when the joint sits at the origin marker).
    """
    j = m.joint(joint_id)
    da = _direction_at_joint(m, c, j.link_a, j)
    db = _direction_at_joint(m, c, j.link_b, j)
    return fold_quadrant(db - da)


def transmission_angle_series(m: Mechanism, pa: PoseArrays, joint_id: str) -> np.ndarray:
    """Vectorized transmission_angle_at across a sweep."""
    j = m.joint(joint_id)

    def dirs(link_id, marker):
        lk = m.link(link_id)
        v = lk.marker(marker) - lk.marker("origin")
        ang = pa.angles[pa.index(link_id)]
        if v.norm() < 1e-12:
            return ang
        return ang + math.atan2(v.y, v.x)

    diff = dirs(j.link_b, j.marker_b) - dirs(j.link_a, j.marker_a)
    folded = np.abs(diff) % math.pi
    return np.where(folded > math.pi / 2, math.pi - folded, folded)
