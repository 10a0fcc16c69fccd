"""Piecewise-constant-curvature model of the tapered continuum limbs.

A limb is a chain of equal-length circular arc segments, each parameterized
by curvature kappa and bending-plane azimuth phi.  Four tendons run along
the limb at 90-degree stations; their length changes follow the standard
moment-arm sum dl_i = -sum_j r_j kappa_j cos(phi_j - beta_i) s_j with the
moment arm r_j taken at 75% of the local taper radius at each segment
midpoint.  Inverse kinematics is damped least squares on a finite-difference
Jacobian.  The default geometry is the full-scale 600 mm limb; a half-scale
preset mirrors the pool-test hardware.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contact import PlanePatch, contact_force, nearest_patch
from .mathutil import wrap_angle

TENDON_COUNT = 4


class UnreachableTargetError(ValueError):
    """Raised when an IK target lies outside the limb workspace sphere."""


@dataclass(frozen=True)
class LimbGeometry:
    """Tapered limb geometry: length, base/tip radii and segment count."""

    length: float = 0.6
    base_radius: float = 0.03
    tip_radius: float = 0.01
    n_segments: int = 6
    tendon_offset_ratio: float = 0.75
    kappa_max: float | None = None

    def validate(self) -> None:
        if not self.length > 0.0:
            raise ValueError("limb length must be > 0")
        if not 0.0 < self.tip_radius <= self.base_radius:
            raise ValueError("radii must satisfy 0 < tip <= base")
        if self.n_segments < 1:
            raise ValueError("need at least one segment")
        if not 0.0 < self.tendon_offset_ratio <= 1.0:
            raise ValueError("tendon offset ratio must be in (0, 1]")

    @classmethod
    def half_scale(cls) -> "LimbGeometry":
        """Half-scale build used in pool trials."""
        return cls(length=0.3, base_radius=0.015, tip_radius=0.005)

    @property
    def segment_length(self) -> float:
        return self.length / self.n_segments

    @property
    def curvature_limit(self) -> float:
        if self.kappa_max is not None:
            return self.kappa_max
        return 2.0 * math.pi / self.length

    def local_radius(self, arclength: float) -> float:
        """Taper radius of the cross-section at ``arclength`` from the base."""
        frac = arclength / self.length
        return self.base_radius + (self.tip_radius - self.base_radius) * frac


@dataclass(frozen=True)
class LimbConfig:
    """Per-segment curvatures (1/m) and bending-plane azimuths (rad)."""

    kappa: tuple[float, ...]
    phi: tuple[float, ...]

    def __post_init__(self):
        if len(self.kappa) != len(self.phi):
            raise ValueError("kappa and phi must have equal length")

    @classmethod
    def straight(cls, n_segments: int = 6) -> "LimbConfig":
        return cls(kappa=(0.0,) * n_segments, phi=(0.0,) * n_segments)


@dataclass(frozen=True)
class TipPose:
    """Limb tip position (m) and unit tangent direction in the base frame."""

    position: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class TendonState:
    """Tendon length changes relative to straight, plus indicative tensions."""

    length_change: np.ndarray
    tension: np.ndarray


def _rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _segment_transform(kappa: float, phi: float,
                       s: float) -> tuple[np.ndarray, np.ndarray]:
    """Rotation and translation of one constant-curvature arc segment.

    The straight case and small bend angles use series forms so there is no
    division by a vanishing curvature.
    """
    theta = kappa * s
    if kappa == 0.0:
        return np.eye(3), np.array([0.0, 0.0, s])
    if abs(theta) < 1e-4:
        px = s * theta / 2.0 * (1.0 - theta * theta / 12.0)
        pz = s * (1.0 - theta * theta / 6.0)
    else:
        px = (1.0 - math.cos(theta)) / kappa
        pz = math.sin(theta) / kappa
    rz = _rot_z(phi)
    rotation = rz @ _rot_y(theta) @ _rot_z(-phi)
    translation = rz @ np.array([px, 0.0, pz])
    return rotation, translation


def forward_kinematics(config: LimbConfig, geom: LimbGeometry) -> TipPose:
    """Tip pose of the limb for a given piecewise-curvature configuration.

    The base frame has z along the undeformed limb axis; a straight limb has
    its tip at (0, 0, length).
    """
    geom.validate()
    if len(config.kappa) != geom.n_segments:
        raise ValueError("config does not match segment count")
    limit = geom.curvature_limit
    if any(abs(k) > limit + 1e-12 for k in config.kappa):
        raise ValueError("segment curvature beyond limit")

    s = geom.segment_length
    rotation = np.eye(3)
    position = np.zeros(3)
    for kappa, phi in zip(config.kappa, config.phi):
        seg_rot, seg_trans = _segment_transform(kappa, phi, s)
        position = position + rotation @ seg_trans
        rotation = rotation @ seg_rot
    return TipPose(position=position, direction=rotation[:, 2].copy())


def tendon_lengths(config: LimbConfig, geom: LimbGeometry,
                   pretension: float = 5.0,
                   tendon_stiffness: float = 2000.0) -> TendonState:
    """Tendon length changes for the four 90-degree tendon stations.

    Stations sit at azimuths 0, 90, 180, 270 degrees, giving the exact
    antisymmetry dl_0 + dl_2 = dl_1 + dl_3 = 0.  Tensions are an indicative
    pretension-plus-stiffness readout for telemetry, floored at zero.
    """
    geom.validate()
    if len(config.kappa) != geom.n_segments:
        raise ValueError("config does not match segment count")
    s = geom.segment_length
    cos_sum = 0.0
    sin_sum = 0.0
    for j, (kappa, phi) in enumerate(zip(config.kappa, config.phi)):
        midpoint = (j + 0.5) * s
        arm = geom.tendon_offset_ratio * geom.local_radius(midpoint)
        term = arm * kappa * s
        cos_sum += term * math.cos(phi)
        sin_sum += term * math.sin(phi)
    length_change = np.array([-cos_sum, -sin_sum, cos_sum, sin_sum])
    tension = np.maximum(pretension - tendon_stiffness * length_change, 0.0)
    return TendonState(length_change=length_change, tension=tension)


def _pack(config: LimbConfig) -> np.ndarray:
    return np.array(list(config.kappa) + list(config.phi))


def _unpack(q: np.ndarray, geom: LimbGeometry) -> LimbConfig:
    n = geom.n_segments
    limit = geom.curvature_limit
    kappa = tuple(float(np.clip(k, -limit, limit)) for k in q[:n])
    phi = tuple(wrap_angle(float(p)) for p in q[n:])
    return LimbConfig(kappa=kappa, phi=phi)


def _fd_jacobian(q: np.ndarray, geom: LimbGeometry,
                 step: float = 1e-7) -> np.ndarray:
    """Forward-difference Jacobian of the tip position w.r.t. (kappa, phi)."""
    base = forward_kinematics(_unpack(q, geom), geom).position
    jac = np.zeros((3, q.size))
    for i in range(q.size):
        probe = q.copy()
        probe[i] += step
        tip = forward_kinematics(_unpack(probe, geom), geom).position
        jac[:, i] = (tip - base) / step
    return jac


@dataclass(frozen=True)
class IKResult:
    config: LimbConfig
    residual: float
    iterations: int
    converged: bool


def _dls_solve(q: np.ndarray, target: np.ndarray, geom: LimbGeometry,
               tol: float, max_iter: int,
               damping: float) -> tuple[np.ndarray, float, int]:
    """One damped-least-squares descent from a single starting point."""
    tip = forward_kinematics(_unpack(q, geom), geom).position
    error = target - tip
    best_q, best_res = q.copy(), float(np.linalg.norm(error))
    lam = damping

    iterations = 0
    for iterations in range(1, max_iter + 1):
        if best_res < tol:
            iterations -= 1
            break
        jac = _fd_jacobian(q, geom)
        gram = jac @ jac.T + lam ** 2 * np.eye(3)
        dq = jac.T @ np.linalg.solve(gram, error)
        alpha, improved = 1.0, False
        for _ in range(8):
            trial = q + alpha * dq
            trial_tip = forward_kinematics(_unpack(trial, geom), geom).position
            trial_res = float(np.linalg.norm(target - trial_tip))
            if trial_res < best_res:
                q, best_res = trial, trial_res
                error = target - trial_tip
                best_q = q.copy()
                improved = True
                break
            alpha *= 0.5
        if improved:
            lam = max(damping, lam / 3.0)
        else:
            lam *= 10.0
            if lam > 1e3:
                break
    return best_q, best_res, iterations


def _single_arc_seed(target: np.ndarray, geom: LimbGeometry,
                     arc_fraction: float = 1.0) -> LimbConfig:
    """Uniform-curvature start that already points at the target.

    A single arc of total bend theta = 2 atan2(rho, z) passes through the
    target direction; using it (or a fraction of it) as the initial guess
    avoids the flat gradients a straight limb sees for targets far off axis.
    """
    x, y, z = (float(v) for v in target)
    rho = math.hypot(x, y)
    n = geom.n_segments
    if rho < 1e-12 and z >= 0.0:
        return LimbConfig.straight(n)
    phi0 = math.atan2(y, x)
    theta = 2.0 * math.atan2(rho, z) * arc_fraction
    limit = geom.curvature_limit
    kappa0 = float(np.clip(theta / geom.length, -limit, limit))
    return LimbConfig(kappa=(kappa0,) * n, phi=(phi0,) * n)


def inverse_kinematics(target: np.ndarray, geom: LimbGeometry,
                       seed: LimbConfig | None = None, *,
                       tol: float = 1e-4, max_iter: int = 200,
                       damping: float = 1e-3) -> IKResult:
    """Damped-least-squares IK for the tip position.

    Iterates dq = J^T (J J^T + lambda^2 I)^-1 e with a backtracking step and
    adaptive damping, from ``seed`` (straight by default).  If a start stalls
    short of ``tol``, the solve restarts from a small fixed ladder of
    uniform-arc guesses aimed at the target, so the result is deterministic.
    Raises UnreachableTargetError when the target lies beyond the limb
    length; a non-converged solve returns the best iterate with its residual.
    """
    geom.validate()
    target = np.asarray(target, dtype=float)
    if target.shape != (3,):
        raise ValueError("target must be a 3-vector")
    if float(np.linalg.norm(target)) > geom.length + 1e-12:
        raise UnreachableTargetError(
            f"target at {np.linalg.norm(target):.4f} m exceeds limb length "
            f"{geom.length:.4f} m")

    config = seed if seed is not None else LimbConfig.straight(geom.n_segments)
    if len(config.kappa) != geom.n_segments:
        raise ValueError("seed does not match segment count")

    starts = [config,
              _single_arc_seed(target, geom),
              _single_arc_seed(target, geom, arc_fraction=0.5),
              _single_arc_seed(target, geom, arc_fraction=0.25)]
    # Near-axis targets short of full reach need an S-bend; a straight (or
    # nearly straight) start has a second-order-flat tip-z derivative there,
    # so offer a few bent starts that break the degeneracy.
    x, y, _ = (float(v) for v in target)
    rho = math.hypot(x, y)
    if (rho < 0.1 * geom.length
            and float(np.linalg.norm(target)) < 0.995 * geom.length):
        phi0 = math.atan2(y, x) if rho > 1e-12 else 0.0
        n = geom.n_segments
        for theta in (0.75, 1.5, 2.5):
            starts.append(LimbConfig(kappa=(theta / geom.length,) * n,
                                     phi=(phi0,) * n))
    best_q, best_res, total_iter = None, math.inf, 0
    for start in starts:
        q, res, iters = _dls_solve(_pack(start), target, geom, tol,
                                   max_iter, damping)
        total_iter += iters
        if res < best_res:
            best_q, best_res = q, res
        if best_res < tol:
            break
    return IKResult(config=_unpack(best_q, geom), residual=best_res,
                    iterations=total_iter, converged=best_res < tol)


def mirror_config(config: LimbConfig) -> LimbConfig:
    """Mirror a configuration across the base x-z plane (phi -> -phi).

    The mirrored tip position is the reflection (x, y, z) -> (x, -y, z),
    exactly in floating point: plain negation (no range reduction) keeps
    cos(phi) bit-identical and flips sin(phi) bit-exactly.
    """
    return LimbConfig(kappa=config.kappa,
                      phi=tuple(-p for p in config.phi))


def tip_contact(tip: TipPose, patches, stiffness: float) -> np.ndarray:
    """Elastic contact force on the limb tip against bounded plane patches.

    ``patches`` is a sequence of PlanePatch (or any object exposing a
    ``patches`` attribute, e.g. a proxy environment).  The force is
    stiffness * penetration along the outward normal of the nearest patch,
    zero in free space.
    """
    plane_list = tuple(getattr(patches, "patches", patches))
    point = np.asarray(tip.position, dtype=float)
    patch = nearest_patch(point, plane_list)
    return contact_force(point, None, patch, stiffness)
