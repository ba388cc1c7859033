"""Pseudo-rigid-body treatment of living hinges.

Each thin flexible segment is lumped into a torsional spring at the hinge:
k = E*I/l with the rectangular second moment I = w*t^3/12. Quasi-static
equilibrium of a chain with sprung hinges minimizes total potential (elastic
energy minus load work) subject to joint coincidence, with the crank held at
a fixed angle when an actuated joint exists.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, LargeDeflectionWarning
from .geometry import Point2, drot
from .kinematics import Configuration, ConstraintSystem, SolveSettings, DEFAULT_SETTINGS, initial_guess
from .mechanism import CompliantHinge, Mechanism


@dataclass(frozen=True)
class HingeGeometry:
    """Rectangular flexure dimensions and material modulus (SI units)."""

    width: float
    thickness: float
    length: float
    elastic_modulus: float

    def __post_init__(self):
        vals = (self.width, self.thickness, self.length, self.elastic_modulus)
        if not all(v > 0.0 and math.isfinite(v) for v in vals):
            raise ValueError(f"hinge geometry values must be positive, got {vals}")

    @property
    def thin(self) -> bool:
        return self.thickness <= self.width


def hinge_stiffness(hg: HingeGeometry) -> float:
    """Small-length flexural pivot stiffness, N*m per radian."""
    inertia = hg.width * hg.thickness ** 3 / 12.0
    return hg.elastic_modulus * inertia / hg.length


@dataclass(frozen=True)
class LoadCase:
    """External loading: point forces on markers and pure joint moments."""

    forces: tuple[tuple[str, str, Point2], ...] = ()   # (link id, marker, force N)
    moments: tuple[tuple[str, float], ...] = ()        # (joint id, N*m)


def _hinges(m: Mechanism):
    return [(j, j.kind) for j in m.joints if isinstance(j.kind, CompliantHinge)]


def elastic_energy(m: Mechanism, c: Configuration) -> float:
    """Sum of 0.5*k*(deflection)^2 over compliant hinges; pins contribute 0."""
    total = 0.0
    for j, hinge in _hinges(m):
        d = (c.pose(j.link_b).angle - c.pose(j.link_a).angle) - hinge.rest_angle
        total += 0.5 * hinge.stiffness * d * d
    return total


class _Potential:
    """Total potential V(q) = elastic - load work, over moving-link poses."""

    def __init__(self, m: Mechanism, load: LoadCase, sys: ConstraintSystem):
        self.sys = sys
        self.springs = []
        for j, hinge in _hinges(m):
            self.springs.append((sys.index.get(j.link_a), sys.index.get(j.link_b),
                                 hinge.stiffness, hinge.rest_angle))
        self.forces = []
        for lid, marker, f in load.forces:
            self.forces.append((sys.index.get(lid), m.link(lid).marker(marker).as_array(),
                                f.as_array()))
        self.moments = []
        for jid, mom in load.moments:
            j = m.joint(jid)
            self.moments.append((sys.index.get(j.link_a), sys.index.get(j.link_b), mom))
        self.k_max = max((s[2] for s in self.springs), default=1.0)

    def _angle(self, q, idx):
        return 0.0 if idx is None else q[idx + 2]

    def value(self, q: np.ndarray) -> float:
        v = 0.0
        for ia, ib, k, rest in self.springs:
            d = self._angle(q, ib) - self._angle(q, ia) - rest
            v += 0.5 * k * d * d
        for idx, p, f in self.forces:
            w = self.sys._world(q, idx, p)
            v -= float(f @ w)
        for ia, ib, mom in self.moments:
            v -= mom * (self._angle(q, ib) - self._angle(q, ia))
        return v

    def grad(self, q: np.ndarray) -> np.ndarray:
        g = np.zeros_like(q)
        for ia, ib, k, rest in self.springs:
            d = self._angle(q, ib) - self._angle(q, ia) - rest
            if ib is not None:
                g[ib + 2] += k * d
            if ia is not None:
                g[ia + 2] -= k * d
        for idx, p, f in self.forces:
            if idx is None:
                continue
            g[idx] -= f[0]
            g[idx + 1] -= f[1]
            g[idx + 2] -= float(f @ (drot(q[idx + 2]) @ p))
        for ia, ib, mom in self.moments:
            if ib is not None:
                g[ib + 2] -= mom
            if ia is not None:
                g[ia + 2] += mom
        return g


def projected_gradient(gradient: np.ndarray, J: np.ndarray | None) -> np.ndarray:
    """Component of the gradient tangent to the constraint manifold."""
    if J is None or J.size == 0:
        return gradient
    JJt = J @ J.T
    lam = np.linalg.lstsq(JJt, J @ gradient, rcond=None)[0]
    return gradient - J.T @ lam


def solve_equilibrium(m: Mechanism, theta: float, load: LoadCase,
                      settings: SolveSettings = DEFAULT_SETTINGS,
                      guess: Configuration | None = None) -> Configuration:
    """Quasi-static equilibrium of the compliant chain under a load case.

    Penalty continuation (factor 10 per stage, 5 stages) followed by a
    Lagrange-Newton polish. The actuated joint, when present, is locked at
    theta; every other joint is a free pin, sprung when compliant.
    """
    sys = ConstraintSystem(m)
    pot = _Potential(m, load, sys)
    if guess is None:
        guess = initial_guess(m, theta)
    q = sys.q_from(guess)

    def cons(qv):
        return sys.residual(qv, theta)

    mu0 = 10.0 * pot.k_max
    for stage in range(5):
        mu = mu0 * 10.0 ** stage

        def fun(qv):
            c = cons(qv)
            return pot.value(qv) + 0.5 * mu * float(c @ c)

        def jac(qv):
            c = cons(qv)
            return pot.grad(qv) + mu * (sys.jacobian(qv).T @ c)

        res = minimize(fun, q, jac=jac, method="L-BFGS-B",
                       options={"maxiter": 500, "ftol": 1e-16, "gtol": 1e-12})
        q = res.x

    # Lagrange-Newton polish on the KKT conditions
    tol_c = settings.tolerance
    tol_g = settings.tolerance * pot.k_max
    h = 1e-7
    lam = None
    for _ in range(40):
        J = sys.jacobian(q)
        g = pot.grad(q)
        c = cons(q)
        lam = np.linalg.lstsq(J.T, -g, rcond=None)[0]
        pg = g + J.T @ lam
        if np.linalg.norm(pg) <= tol_g and np.linalg.norm(c) <= tol_c:
            break

        def grad_lagrangian(qv):
            return pot.grad(qv) + sys.jacobian(qv).T @ lam

        n = len(q)
        H = np.zeros((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            H[:, i] = (grad_lagrangian(q + e) - grad_lagrangian(q - e)) / (2 * h)
        H = 0.5 * (H + H.T)
        kkt = np.block([[H, J.T], [J, np.zeros((J.shape[0], J.shape[0]))]])
        rhs = np.concatenate([-pg, -c])
        try:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        except np.linalg.LinAlgError as e:
            raise ConvergenceError("equilibrium polish failed (singular KKT system)") from e
        q = q + sol[:len(q)]
    else:
        J = sys.jacobian(q)
        g = pot.grad(q)
        c = cons(q)
        pg = projected_gradient(g, J)
        if np.linalg.norm(pg) > tol_g * 100 or np.linalg.norm(c) > tol_c * 100:
            raise ConvergenceError(
                f"equilibrium did not converge: |proj grad|={np.linalg.norm(pg):.3e}, "
                f"|closure|={np.linalg.norm(c):.3e}")

    config = sys.config_from(q, theta)
    for j, hinge in _hinges(m):
        d = (config.pose(j.link_b).angle - config.pose(j.link_a).angle) - hinge.rest_angle
        if abs(d) > math.pi / 2:
            warnings.warn(f"hinge {j.id!r} deflection {d:.3f} rad exceeds pi/2",
                          LargeDeflectionWarning)
    return config


def total_potential(m: Mechanism, load: LoadCase, c: Configuration) -> float:
    """Elastic energy minus work done by the load at configuration c."""
    sys = ConstraintSystem(m)
    pot = _Potential(m, load, sys)
    return pot.value(sys.q_from(c))


def stationarity(m: Mechanism, load: LoadCase, c: Configuration, theta: float) -> tuple[float, float]:
    """(projected gradient norm, closure residual norm) at a configuration."""
    sys = ConstraintSystem(m)
    pot = _Potential(m, load, sys)
    q = sys.q_from(c)
    J = sys.jacobian(q)
    pg = projected_gradient(pot.grad(q), J)
    return float(np.linalg.norm(pg)), float(np.linalg.norm(sys.residual(q, theta)))
