"""Waypoint and trajectory guidance for the planar hull.

Waypoint following uses line-of-sight steering with an adaptive drift term:
psi_d = leg azimuth + atan(-e / lookahead) + drift_hat, where e is the
cross-track error and drift_hat is an integral drift compensator (clamped
against windup).  Trajectory tracking computes the generalized constraint
force Q_c = M^(1/2) pinv(A M^(-1/2)) (b - A a) that minimally (in the
M^-1 metric) accelerates the free dynamics onto a servo constraint
A nu_dot = b built from the reference acceleration plus PD feedback.
A PD heading / PI speed autopilot and a depth PD round out the stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .dynamics import VehicleState, Wrench
from .mathutil import clamp, rot2, wrap_angle


@dataclass(frozen=True)
class WaypointPlan:
    """Ordered planar waypoints with acceptance radius and cruise speed."""

    waypoints: tuple[tuple[float, float], ...]
    acceptance_radius: float = 1.0
    cruise_speed: float = 0.8

    def validate(self) -> None:
        if len(self.waypoints) < 1:
            raise ValueError("plan needs at least one waypoint")
        if not self.acceptance_radius > 0.0:
            raise ValueError("acceptance radius must be > 0")
        if not self.cruise_speed > 0.0:
            raise ValueError("cruise speed must be > 0")


@dataclass(frozen=True)
class LosParams:
    """Line-of-sight guidance state and gains.

    ``lookahead`` defaults to two hull lengths.  ``drift_hat`` is the
    adaptive drift-compensation angle fed back into the desired heading;
    it integrates -gamma * e and is clamped to +/- drift_limit.
    """

    lookahead: float = 2.4
    gamma: float = 0.05
    drift_hat: float = 0.0
    drift_limit: float = math.pi / 4

    def validate(self) -> None:
        if not self.lookahead > 0.0:
            raise ValueError("lookahead must be > 0")
        if self.gamma < 0.0:
            raise ValueError("gamma must be >= 0")


@dataclass(frozen=True)
class LosCommand:
    """Output of one LOS step: setpoints plus updated guidance state."""

    heading: float
    speed: float
    cross_track_error: float
    active_index: int
    done: bool
    params: LosParams


def los_step(state: VehicleState, plan: WaypointPlan, active_index: int,
             params: LosParams, dt: float) -> LosCommand:
    """One guidance step of adaptive line-of-sight waypoint following.

    The current leg runs from the previous waypoint (or the first leg's
    start) to the active waypoint.  Inside the acceptance radius the active
    index advances; past the final waypoint the commanded speed is zero and
    the plan reports done.
    """
    plan.validate()
    params.validate()
    n = len(plan.waypoints)
    while active_index < n:
        wx, wy = plan.waypoints[active_index]
        if math.hypot(wx - state.x, wy - state.y) <= plan.acceptance_radius:
            active_index += 1
        else:
            break
    if active_index >= n:
        return LosCommand(heading=state.psi, speed=0.0,
                          cross_track_error=0.0, active_index=n,
                          done=True, params=params)

    wx, wy = plan.waypoints[active_index]
    if active_index == 0:
        # First leg: aim straight at the waypoint from the current position.
        azimuth = math.atan2(wy - state.y, wx - state.x)
        error = 0.0
    else:
        px, py = plan.waypoints[active_index - 1]
        azimuth = math.atan2(wy - py, wx - px)
        error = (-(state.x - px) * math.sin(azimuth)
                 + (state.y - py) * math.cos(azimuth))

    heading = wrap_angle(azimuth + math.atan(-error / params.lookahead)
                         + params.drift_hat)
    drift = clamp(params.drift_hat - params.gamma * error * dt,
                  -params.drift_limit, params.drift_limit)
    return LosCommand(heading=heading, speed=plan.cruise_speed,
                      cross_track_error=error, active_index=active_index,
                      done=False, params=replace(params, drift_hat=drift))


def _sqrt_spd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root and inverse square root of an SPD matrix."""
    if m.shape[0] != m.shape[1] or not np.allclose(m, m.T, atol=1e-9):
        raise ValueError("inertia matrix must be symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    if vals.min() <= 0.0:
        raise ValueError("inertia matrix must be positive definite")
    root = vecs @ np.diag(np.sqrt(vals)) @ vecs.T
    inv_root = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
    return root, inv_root


def uk_force(inertia: np.ndarray, tau_free: np.ndarray, a_mat: np.ndarray,
             b_vec: np.ndarray) -> np.ndarray:
    """Generalized constraint force enforcing A nu_dot = b.

    Q_c = M^(1/2) pinv(A M^(-1/2)) (b - A a) with a = M^-1 tau_free; among
    all forces realizing a consistent constraint it minimizes Q^T M^-1 Q.
    """
    inertia = np.asarray(inertia, dtype=float)
    tau_free = np.asarray(tau_free, dtype=float)
    a_mat = np.atleast_2d(np.asarray(a_mat, dtype=float))
    b_vec = np.atleast_1d(np.asarray(b_vec, dtype=float))
    if a_mat.shape[1] != inertia.shape[0] or b_vec.size != a_mat.shape[0]:
        raise ValueError("constraint dimensions do not match the inertia")
    root, inv_root = _sqrt_spd(inertia)
    a_free = np.linalg.solve(inertia, tau_free)
    correction = np.linalg.pinv(a_mat @ inv_root, rcond=1e-10) @ (
        b_vec - a_mat @ a_free)
    return root @ correction


@dataclass(frozen=True)
class TrajectoryRef:
    """Time-parameterized planar reference with consistent derivatives.

    ``position``, ``velocity`` and ``acceleration`` map time to (x, y, psi)
    and its first two derivatives.  ``from_samples`` builds a linear
    interpolant and verifies the supplied derivative samples against finite
    differences of the position samples at load time.
    """

    position: Callable[[float], np.ndarray]
    velocity: Callable[[float], np.ndarray]
    acceleration: Callable[[float], np.ndarray]
    t_min: float = 0.0
    t_max: float = math.inf

    def eval(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.t_min <= t <= self.t_max:
            raise ValueError(f"reference time {t} outside "
                             f"[{self.t_min}, {self.t_max}]")
        return self.position(t), self.velocity(t), self.acceleration(t)

    @classmethod
    def circle(cls, radius: float, omega: float,
               center: tuple[float, float] = (0.0, 0.0)) -> "TrajectoryRef":
        """Counter-clockwise circle traversed at constant angular rate."""
        cx, cy = center

        def pos(t: float) -> np.ndarray:
            a = omega * t
            return np.array([cx + radius * math.cos(a),
                             cy + radius * math.sin(a),
                             wrap_angle(a + math.pi / 2)])

        def vel(t: float) -> np.ndarray:
            a = omega * t
            return np.array([-radius * omega * math.sin(a),
                             radius * omega * math.cos(a), omega])

        def acc(t: float) -> np.ndarray:
            a = omega * t
            return np.array([-radius * omega ** 2 * math.cos(a),
                             -radius * omega ** 2 * math.sin(a), 0.0])

        return cls(position=pos, velocity=vel, acceleration=acc)

    @classmethod
    def from_samples(cls, times: np.ndarray, positions: np.ndarray,
                     velocities: np.ndarray, accelerations: np.ndarray,
                     fd_tol: float = 1e-2) -> "TrajectoryRef":
        times = np.asarray(times, dtype=float)
        positions = np.asarray(positions, dtype=float)
        velocities = np.asarray(velocities, dtype=float)
        accelerations = np.asarray(accelerations, dtype=float)
        if times.ndim != 1 or times.size < 3 or np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing, >= 3 samples")
        for name, arr in (("positions", positions), ("velocities", velocities),
                          ("accelerations", accelerations)):
            if arr.shape != (times.size, 3):
                raise ValueError(f"{name} must have shape (n, 3)")
        fd_vel = np.gradient(positions, times, axis=0)
        if float(np.max(np.abs(fd_vel[1:-1] - velocities[1:-1]))) > fd_tol:
            raise ValueError("velocity samples inconsistent with positions")
        fd_acc = np.gradient(velocities, times, axis=0)
        if float(np.max(np.abs(fd_acc[1:-1] - accelerations[1:-1]))) > fd_tol:
            raise ValueError("acceleration samples inconsistent with velocities")

        def interp(series: np.ndarray) -> Callable[[float], np.ndarray]:
            def f(t: float) -> np.ndarray:
                return np.array([np.interp(t, times, series[:, k])
                                 for k in range(3)])
            return f

        return cls(position=interp(positions), velocity=interp(velocities),
                   acceleration=interp(accelerations),
                   t_min=float(times[0]), t_max=float(times[-1]))


def trajectory_constraints(state: VehicleState, ref: TrajectoryRef, t: float,
                           kp: float = 4.0, kd: float = 4.0
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Servo constraint (A, b) pinning the planar acceleration to a reference.

    b encodes acc_d + kd (vel_d - vel) + kp (pos_d - pos) expressed in the
    body frame (A selects the u_dot and v_dot components), including the
    frame-rotation term so the constraint is exact in world coordinates.
    """
    pos_d, vel_d, acc_d = ref.eval(t)
    rot = rot2(state.psi)
    vel_world = rot @ np.array([state.u, state.v])
    cmd = (acc_d[:2] + kd * (vel_d[:2] - vel_world)
           + kp * (pos_d[:2] - np.array([state.x, state.y])))
    spin = state.r * np.array([-state.v, state.u])
    b_vec = rot.T @ cmd - spin
    a_mat = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    return a_mat, b_vec


@dataclass(frozen=True)
class AutopilotGains:
    """PD heading / PI surge-speed autopilot gains with integrator clamp."""

    kp_psi: float = 6.0
    kd_psi: float = 10.0
    kp_u: float = 40.0
    ki_u: float = 8.0
    integrator_limit: float = 6.0


def autopilot(state: VehicleState, heading_d: float, speed_d: float,
              gains: AutopilotGains, integrator: float,
              dt: float) -> tuple[Wrench, float]:
    """PD heading plus PI surge-speed regulator (planar wrench, Y = 0).

    Returns the commanded wrench and the updated speed-error integral.
    """
    heading_error = wrap_angle(heading_d - state.psi)
    speed_error = speed_d - state.u
    integrator = clamp(integrator + speed_error * dt,
                       -gains.integrator_limit, gains.integrator_limit)
    force_x = gains.kp_u * speed_error + gains.ki_u * integrator
    torque = gains.kp_psi * heading_error - gains.kd_psi * state.r
    return Wrench(X=force_x, Y=0.0, N=torque, Z=0.0), integrator


@dataclass(frozen=True)
class DepthGains:
    kp: float = 60.0
    kd: float = 80.0


def depth_autopilot(state: VehicleState, depth_d: float,
                    gains: DepthGains) -> float:
    """PD depth regulator returning the heave force Z (positive down)."""
    return gains.kp * (depth_d - state.z) - gains.kd * state.w
