"""Planar 3-DOF rigid-body dynamics of the hull with a decoupled heave channel.

Surge, sway and yaw follow the standard maneuvering form

    M nu_dot + C(nu) nu + D(nu) nu = tau,      nu = (u, v, r)

with diagonal inertia (rigid-body mass plus added mass), rigid-body Coriolis
terms and linear-plus-quadratic drag D(nu) = D_lin + D_quad * |nu|.  Heave is
integrated independently as (m + Zwd) w_dot = Z - d_lin w - d_quad w |w|;
roll and pitch are ignored.  Integration is fixed-step RK4.  An optional
constant ambient current enters the position kinematics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .mathutil import all_finite, wrap_angle


@dataclass(frozen=True)
class Wrench:
    """Generalized force: X surge and Y sway in N, N yaw torque in N m,
    plus the decoupled heave force Z (positive down)."""

    X: float = 0.0
    Y: float = 0.0
    N: float = 0.0
    Z: float = 0.0

    @classmethod
    def zero(cls) -> "Wrench":
        return cls()

    def __add__(self, other: "Wrench") -> "Wrench":
        return Wrench(self.X + other.X, self.Y + other.Y,
                      self.N + other.N, self.Z + other.Z)

    def scaled(self, factor: float) -> "Wrench":
        return Wrench(factor * self.X, factor * self.Y,
                      factor * self.N, factor * self.Z)


@dataclass(frozen=True)
class VehicleState:
    """Pose and body-frame velocities of the hull.

    x, y are plane coordinates in meters, z is depth (positive down, >= 0),
    psi is heading in (-pi, pi].  u, v, r, w are surge, sway, yaw rate and
    heave rate in the body frame.  t is simulation time in seconds.
    """

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    psi: float = 0.0
    u: float = 0.0
    v: float = 0.0
    r: float = 0.0
    w: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class VehicleParams:
    """Hull parameters.

    Defaults describe a 1.2 m, 30 kg vehicle sized so that full collective
    fin thrust (10.8 N) balances drag at a terminal surge speed of 1 m/s.
    ``added_mass`` is the diagonal (Xud, Yvd, Nrd, Zwd); the drag diagonals
    cover (u, v, r, w).  ``current`` is a constant ambient flow in the plane
    frame, applied in the kinematics only.
    """

    mass: float = 30.0
    added_mass: tuple[float, float, float, float] = (10.0, 25.0, 2.0, 25.0)
    drag_linear: tuple[float, float, float, float] = (2.8, 20.0, 4.0, 20.0)
    drag_quadratic: tuple[float, float, float, float] = (8.0, 60.0, 6.0, 50.0)
    length: float = 1.2
    max_depth: float = 100.0
    yaw_inertia: float | None = None
    current: tuple[float, float] = (0.0, 0.0)

    def validate(self) -> None:
        if not self.mass > 0.0:
            raise ValueError("vehicle mass must be > 0")
        if not self.length > 0.0:
            raise ValueError("vehicle length must be > 0")
        if any(a < 0.0 for a in self.added_mass):
            raise ValueError("added-mass entries must be >= 0")
        if any(d < 0.0 for d in self.drag_linear) or any(
                d < 0.0 for d in self.drag_quadratic):
            raise ValueError("drag coefficients must be >= 0")
        if self.yaw_inertia is not None and not self.yaw_inertia > 0.0:
            raise ValueError("yaw inertia must be > 0")

    @property
    def izz(self) -> float:
        """Yaw inertia; defaults to the slender-body estimate m L^2 / 12."""
        if self.yaw_inertia is not None:
            return self.yaw_inertia
        return self.mass * self.length ** 2 / 12.0


def planar_inertia(params: VehicleParams) -> np.ndarray:
    """Diagonal 3x3 inertia matrix of the (u, v, r) subsystem."""
    xud, yvd, nrd, _ = params.added_mass
    return np.diag([params.mass + xud, params.mass + yvd, params.izz + nrd])


def planar_resistance(state: VehicleState, params: VehicleParams) -> np.ndarray:
    """Coriolis plus drag load (C(nu) nu + D(nu) nu) on the planar DOFs.

    The planar acceleration satisfies M nu_dot = tau - planar_resistance.
    """
    u, v, r = state.u, state.v, state.r
    dl, dq = params.drag_linear, params.drag_quadratic
    m = params.mass
    return np.array([
        -m * v * r + dl[0] * u + dq[0] * u * abs(u),
        m * u * r + dl[1] * v + dq[1] * v * abs(v),
        dl[2] * r + dq[2] * r * abs(r),
    ])


def planar_kinetic_energy(state: VehicleState, params: VehicleParams) -> float:
    """Kinetic energy 0.5 nu^T M nu of the planar (u, v, r) subsystem."""
    xud, yvd, nrd, _ = params.added_mass
    return 0.5 * ((params.mass + xud) * state.u ** 2
                  + (params.mass + yvd) * state.v ** 2
                  + (params.izz + nrd) * state.r ** 2)


def _derivative(y: tuple, tau: Wrench, params: VehicleParams) -> tuple:
    x, yy, z, psi, u, v, r, w = y
    m = params.mass
    xud, yvd, nrd, zwd = params.added_mass
    dl, dq = params.drag_linear, params.drag_quadratic
    cx, cy = params.current

    cpsi, spsi = math.cos(psi), math.sin(psi)
    xdot = u * cpsi - v * spsi + cx
    ydot = u * spsi + v * cpsi + cy
    zdot = w
    psidot = r

    udot = (tau.X + m * v * r - dl[0] * u - dq[0] * u * abs(u)) / (m + xud)
    vdot = (tau.Y - m * u * r - dl[1] * v - dq[1] * v * abs(v)) / (m + yvd)
    rdot = (tau.N - dl[2] * r - dq[2] * r * abs(r)) / (params.izz + nrd)
    wdot = (tau.Z - dl[3] * w - dq[3] * w * abs(w)) / (m + zwd)
    return (xdot, ydot, zdot, psidot, udot, vdot, rdot, wdot)


def step_dynamics(state: VehicleState, tau: Wrench, params: VehicleParams,
                  dt: float) -> VehicleState:
    """Advance the hull by one fixed RK4 step of length ``dt``.

    The heading is wrapped to (-pi, pi] and the depth is clamped at the
    surface (z >= 0, upward heave zeroed there) after the step.
    """
    if not 0.0 < dt <= 0.1:
        raise ValueError("dt must be in (0, 0.1]")
    if not all_finite(tau.X, tau.Y, tau.N, tau.Z):
        raise ValueError("wrench components must be finite")
    params.validate()

    y0 = (state.x, state.y, state.z, state.psi,
          state.u, state.v, state.r, state.w)
    k1 = _derivative(y0, tau, params)
    k2 = _derivative(tuple(a + 0.5 * dt * b for a, b in zip(y0, k1)), tau, params)
    k3 = _derivative(tuple(a + 0.5 * dt * b for a, b in zip(y0, k2)), tau, params)
    k4 = _derivative(tuple(a + dt * b for a, b in zip(y0, k3)), tau, params)
    y1 = [a + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
          for a, b1, b2, b3, b4 in zip(y0, k1, k2, k3, k4)]

    x, yy, z, psi, u, v, r, w = y1
    psi = wrap_angle(psi)
    if z < 0.0:
        z = 0.0
        w = max(w, 0.0)
    return VehicleState(x=x, y=yy, z=z, psi=psi, u=u, v=v, r=r, w=w,
                        t=state.t + dt)
