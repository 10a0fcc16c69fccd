"""Known-map localization: dead reckoning fused with sonar landmark fixes.

The estimator is an extended Kalman filter over the planar pose (x, y, psi).
Prediction integrates the measured body velocities (DVL surge/sway, gyro yaw
rate) through the unicycle kinematics; the injected velocity noise enters
the covariance through the motion Jacobian, on top of a constant
process-noise floor Q_dr.  Updates process sonar range/bearing detections
of mapped landmarks sequentially with innovation gating at 3 sigma and a
Joseph-form covariance update.  A GNSS position fix resets x, y when the
vehicle is at the surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import VehicleState
from .mathutil import wrap_angle

GNSS_SURFACE_DEPTH = 0.3


@dataclass(frozen=True)
class Landmark:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class LandmarkMap:
    """Static map of uniquely identified point landmarks."""

    landmarks: tuple[Landmark, ...]

    def __post_init__(self):
        ids = [lm.id for lm in self.landmarks]
        if len(ids) != len(set(ids)):
            raise ValueError("landmark ids must be unique")

    def get(self, landmark_id: int) -> Landmark | None:
        for lm in self.landmarks:
            if lm.id == landmark_id:
                return lm
        return None


@dataclass(frozen=True)
class NoiseConfig:
    """1-sigma sensor noise levels and sonar visibility range."""

    dvl_sigma: float = 0.01
    imu_sigma: float = 0.002
    depth_sigma: float = 0.02
    gnss_sigma: float = 0.5
    sonar_range_sigma: float = 0.10
    sonar_bearing_sigma: float = 0.02
    sonar_max_range: float = 30.0


@dataclass(frozen=True)
class Detection:
    """One sonar landmark detection: mapped id, range (m), bearing (rad)."""

    landmark_id: int
    range_m: float
    bearing: float


@dataclass(frozen=True)
class SensorFrame:
    """One tick of sensor data, tagged with the noise levels that made it."""

    t: float
    dvl_u: float
    dvl_v: float
    imu_yaw_rate: float
    depth: float
    gnss: tuple[float, float] | None
    detections: tuple[Detection, ...]
    noise: NoiseConfig


def sense(truth: VehicleState, lmap: LandmarkMap, noise: NoiseConfig,
          rng: np.random.Generator) -> SensorFrame:
    """Simulate one frame of noisy sensing from the true state.

    Draw order is fixed (DVL u, v, gyro, depth, then per-landmark range and
    bearing in map order, then GNSS when surfaced) so a fixed seed yields
    bit-identical frames.  Landmarks beyond the sonar range produce no
    detection; GNSS is present only when depth < 0.3 m.
    """
    dvl_u = truth.u + noise.dvl_sigma * rng.standard_normal()
    dvl_v = truth.v + noise.dvl_sigma * rng.standard_normal()
    imu_r = truth.r + noise.imu_sigma * rng.standard_normal()
    depth = truth.z + noise.depth_sigma * rng.standard_normal()

    detections = []
    for lm in lmap.landmarks:
        dx, dy = lm.x - truth.x, lm.y - truth.y
        true_range = math.hypot(dx, dy)
        if true_range > noise.sonar_max_range:
            continue
        rng_meas = true_range + noise.sonar_range_sigma * rng.standard_normal()
        bearing = wrap_angle(math.atan2(dy, dx) - truth.psi
                             + noise.sonar_bearing_sigma * rng.standard_normal())
        detections.append(Detection(landmark_id=lm.id,
                                    range_m=max(rng_meas, 1e-6),
                                    bearing=bearing))

    gnss = None
    if truth.z < GNSS_SURFACE_DEPTH:
        gnss = (truth.x + noise.gnss_sigma * rng.standard_normal(),
                truth.y + noise.gnss_sigma * rng.standard_normal())
    return SensorFrame(t=truth.t, dvl_u=dvl_u, dvl_v=dvl_v, imu_yaw_rate=imu_r,
                       depth=depth, gnss=gnss, detections=tuple(detections),
                       noise=noise)


@dataclass(frozen=True)
class NavEstimate:
    """Planar pose estimate (x, y, psi) with 3x3 covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.shape != (3,) or cov.shape != (3, 3):
            raise ValueError("estimate must be a 3-vector with 3x3 covariance")
        if not np.allclose(cov, cov.T, atol=1e-8):
            raise ValueError("covariance must be symmetric")
        if np.linalg.eigvalsh(cov).min() < -1e-9:
            raise ValueError("covariance must be positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def initial(cls, x: float = 0.0, y: float = 0.0, psi: float = 0.0,
                sigma_pos: float = 1.0, sigma_psi: float = 0.2
                ) -> "NavEstimate":
        return cls(mean=np.array([x, y, psi]),
                   cov=np.diag([sigma_pos ** 2, sigma_pos ** 2,
                                sigma_psi ** 2]))


DEFAULT_Q_DR = np.diag([1e-6, 1e-6, 1e-7])


def predict(est: NavEstimate, frame: SensorFrame, dt: float,
            q_dr: np.ndarray = DEFAULT_Q_DR) -> NavEstimate:
    """Dead-reckoning prediction from measured body velocities.

    Mean: unicycle propagation of (x, y, psi).  Covariance: F P F^T plus the
    velocity noise mapped through the motion Jacobian (scaled dt^2, the
    per-sample injection) plus the floor q_dr * dt.
    """
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    x, y, psi = est.mean
    u, v, r = frame.dvl_u, frame.dvl_v, frame.imu_yaw_rate
    c, s = math.cos(psi), math.sin(psi)
    mean = np.array([x + (u * c - v * s) * dt,
                     y + (u * s + v * c) * dt,
                     wrap_angle(psi + r * dt)])
    f_mat = np.array([[1.0, 0.0, -(u * s + v * c) * dt],
                      [0.0, 1.0, (u * c - v * s) * dt],
                      [0.0, 0.0, 1.0]])
    g_mat = np.array([[c * dt, -s * dt, 0.0],
                      [s * dt, c * dt, 0.0],
                      [0.0, 0.0, dt]])
    noise = frame.noise
    v_cov = np.diag([noise.dvl_sigma ** 2, noise.dvl_sigma ** 2,
                     noise.imu_sigma ** 2])
    cov = f_mat @ est.cov @ f_mat.T + g_mat @ v_cov @ g_mat.T + q_dr * dt
    return NavEstimate(mean=mean, cov=0.5 * (cov + cov.T))


@dataclass(frozen=True)
class UpdateStats:
    accepted: int = 0
    rejected_gate: int = 0
    rejected_unknown: int = 0


def update(est: NavEstimate, detections: tuple[Detection, ...],
           lmap: LandmarkMap, noise: NoiseConfig,
           gate_sigma: float = 3.0) -> tuple[NavEstimate, UpdateStats]:
    """Sequential EKF update with mapped range/bearing detections.

    Bearing innovations are wrapped before use.  A detection whose range or
    bearing innovation exceeds ``gate_sigma`` times its innovation standard
    deviation is rejected and counted; detections of unmapped ids are
    rejected and counted separately.  The covariance update uses the Joseph
    form, which keeps it symmetric positive semidefinite.
    """
    mean, cov = est.mean.copy(), est.cov.copy()
    accepted = rejected_gate = rejected_unknown = 0
    r_mat = np.diag([noise.sonar_range_sigma ** 2,
                     noise.sonar_bearing_sigma ** 2])
    for det in detections:
        lm = lmap.get(det.landmark_id)
        if lm is None:
            rejected_unknown += 1
            continue
        dx, dy = lm.x - mean[0], lm.y - mean[1]
        rng_sq = dx * dx + dy * dy
        rng_pred = math.sqrt(rng_sq)
        if rng_pred < 1e-6:
            rejected_gate += 1
            continue
        bear_pred = wrap_angle(math.atan2(dy, dx) - mean[2])
        innovation = np.array([det.range_m - rng_pred,
                               wrap_angle(det.bearing - bear_pred)])
        h_mat = np.array([[-dx / rng_pred, -dy / rng_pred, 0.0],
                          [dy / rng_sq, -dx / rng_sq, -1.0]])
        s_mat = h_mat @ cov @ h_mat.T + r_mat
        # Rounding can leave tiny negative diagonals once the covariance has
        # collapsed; clamp so the gate rejects rather than comparing to NaN.
        sigmas = np.sqrt(np.maximum(np.diag(s_mat), 0.0))
        if np.any(np.abs(innovation) > gate_sigma * sigmas):
            rejected_gate += 1
            continue
        try:
            gain = cov @ h_mat.T @ np.linalg.inv(s_mat)
        except np.linalg.LinAlgError:
            # Singular innovation covariance: the detection carries no new
            # information at working precision (possible when both the
            # estimate covariance and the sensor noise have collapsed).
            rejected_gate += 1
            continue
        if not np.all(np.isfinite(gain)):
            rejected_gate += 1
            continue
        mean = mean + gain @ innovation
        mean[2] = wrap_angle(mean[2])
        ikh = np.eye(3) - gain @ h_mat
        cov = ikh @ cov @ ikh.T + gain @ r_mat @ gain.T
        cov = 0.5 * (cov + cov.T)
        accepted += 1
    return (NavEstimate(mean=mean, cov=cov),
            UpdateStats(accepted=accepted, rejected_gate=rejected_gate,
                        rejected_unknown=rejected_unknown))


def gnss_reset(est: NavEstimate, fix: tuple[float, float], depth: float,
               noise: NoiseConfig) -> NavEstimate:
    """Absolute position update from a surface GNSS fix.

    Raises ValueError when the vehicle is submerged (depth >= 0.3 m): GNSS
    does not work underwater and a fix there indicates a wiring bug.
    """
    if depth >= GNSS_SURFACE_DEPTH:
        raise ValueError("GNSS fix rejected: vehicle is submerged")
    mean, cov = est.mean.copy(), est.cov.copy()
    h_mat = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    r_mat = noise.gnss_sigma ** 2 * np.eye(2)
    innovation = np.asarray(fix, dtype=float) - mean[:2]
    s_mat = h_mat @ cov @ h_mat.T + r_mat
    gain = cov @ h_mat.T @ np.linalg.inv(s_mat)
    mean = mean + gain @ innovation
    mean[2] = wrap_angle(mean[2])
    ikh = np.eye(3) - gain @ h_mat
    cov = ikh @ cov @ ikh.T + gain @ r_mat @ gain.T
    return NavEstimate(mean=mean, cov=0.5 * (cov + cov.T))
