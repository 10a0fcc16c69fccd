"""Model-mediated limb teleoperation against a planes-only proxy environment.

The operator interacts with a local proxy model (bounded plane patches
fitted to depth samples) instead of the delayed remote scene.  Haptic force
comes from a Kelvin-Voigt law against the proxy; measured tactile contact
from the wet end reconciles the proxy whenever the two disagree: patches
translate to the measured contact point, retreat on phantom contact with a
1 mm hysteresis, and re-estimate stiffness within a clamp of the prior.
Master increments are clutched and rate-limited before feeding limb IK.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .contact import PlanePatch, contact_force, nearest_patch
from .limbs import IKResult, LimbConfig, LimbGeometry, inverse_kinematics
from .modes import ModeState, teleop_allowed

PATCH_INFLATION = 1.1
CONTACT_FORCE_EPS = 0.05
RETREAT_HYSTERESIS = 1e-3
STIFFNESS_CLAMP = 10.0


class DegenerateClusterError(ValueError):
    """Raised for clusters with fewer than 3 points or collinear geometry."""


@dataclass(frozen=True)
class ProxyEnvironment:
    """Planes-only contact model: patches plus shared stiffness/damping."""

    patches: tuple[PlanePatch, ...]
    stiffness: float = 500.0
    damping: float = 50.0

    def validate(self) -> None:
        if not self.stiffness > 0.0:
            raise ValueError("proxy stiffness must be > 0")
        if self.damping < 0.0:
            raise ValueError("proxy damping must be >= 0")


def _fit_patch(points: np.ndarray) -> PlanePatch:
    """Total-least-squares plane through a point cluster.

    The normal is the eigenvector of the sample covariance with the smallest
    eigenvalue, oriented away from the origin (n . centroid >= 0, ties broken
    toward the first positive component); the extent is the in-plane bounding
    box inflated by 10%.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] < 3:
        raise DegenerateClusterError("a cluster needs at least 3 points in 3-D")
    centroid = points.mean(axis=0)
    centered = points - centroid
    cov = centered.T @ centered / points.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    # eigvals ascending: [0] is the normal direction, [1] must be nonzero
    # for the points to span a plane (not a line).
    scale = max(eigvals[2], 1e-18)
    if eigvals[1] / scale < 1e-10:
        raise DegenerateClusterError("cluster points are collinear")
    normal = eigvecs[:, 0]
    orient = float(normal @ centroid)
    if orient < 0.0 or (orient == 0.0 and _lex_negative(normal)):
        normal = -normal
    offset = float(normal @ centroid)

    in_plane = centered @ eigvecs[:, 1:]
    half = PATCH_INFLATION * np.max(np.abs(in_plane), axis=0)
    half = np.maximum(half, 1e-3)
    return PlanePatch(normal=tuple(normal), offset=offset,
                      center=tuple(centroid),
                      half_extents=(float(half[0]), float(half[1])))


def _lex_negative(vec: np.ndarray) -> bool:
    for component in vec:
        if component != 0.0:
            return component < 0.0
    return False


def build_proxy(clusters: Sequence[np.ndarray],
                prior: ProxyEnvironment | None = None,
                stiffness: float = 500.0,
                damping: float = 50.0) -> ProxyEnvironment:
    """Fit one plane patch per spatial cluster of depth samples.

    Degenerate clusters (fewer than 3 points, or collinear) raise
    DegenerateClusterError.  When a prior is given its stiffness and damping
    carry over.
    """
    if prior is not None:
        stiffness, damping = prior.stiffness, prior.damping
    patches = tuple(_fit_patch(c) for c in clusters)
    env = ProxyEnvironment(patches=patches, stiffness=stiffness,
                           damping=damping)
    env.validate()
    return env


def estimate_force(tip: np.ndarray, tip_velocity: np.ndarray | None,
                   env: ProxyEnvironment) -> np.ndarray:
    """Haptic force of the proxy at the commanded tip position.

    Kelvin-Voigt: (k d + b max(0, -v_n)) along the nearest patch normal for
    penetration d > 0; exactly zero in free space, and never sticky.
    """
    env.validate()
    point = np.asarray(tip, dtype=float)
    patch = nearest_patch(point, env.patches)
    return contact_force(point, tip_velocity, patch, env.stiffness,
                         env.damping)


@dataclass(frozen=True)
class TactileMeasurement:
    """Wet-end contact report: measured tip force vector and tip position."""

    force: np.ndarray
    tip_position: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force",
                           np.asarray(self.force, dtype=float))
        object.__setattr__(self, "tip_position",
                           np.asarray(self.tip_position, dtype=float))


@dataclass(frozen=True)
class ReconcileReport:
    env: ProxyEnvironment
    action: str  # "none", "translated", "retreated", "stiffness"


def reconcile(env: ProxyEnvironment,
              measurement: TactileMeasurement) -> ReconcileReport:
    """Update the proxy so it agrees with a measured tactile contact.

    - measured contact while the proxy is free there: translate the nearest
      patch along its normal so the measured tip penetrates it by |F|/k
      (the proxy then reproduces the measured force magnitude);
    - proxy predicts force but the tactile reading is zero: retreat the
      patch beyond the tip by a 1 mm hysteresis;
    - both nonzero: re-estimate the patch stiffness as |F|/d, clamped to
      [0.1 k, 10 k] of the prior.

    A consistent pair leaves the proxy unchanged, so reconcile is idempotent.
    """
    env.validate()
    tip = measurement.tip_position
    force_mag = float(np.linalg.norm(measurement.force))
    patch = nearest_patch(tip, env.patches)
    if patch is None:
        return ReconcileReport(env=env, action="none")
    depth = patch.penetration(tip) if patch.covers_laterally(tip) else 0.0
    measured = force_mag > CONTACT_FORCE_EPS

    if measured and depth <= 0.0:
        target_depth = min(max(force_mag / env.stiffness, 1e-6), 0.05)
        moved = patch.translated_to_depth(tip, target_depth)
        return ReconcileReport(env=_swap(env, patch, moved),
                               action="translated")
    if not measured and depth > 0.0:
        moved = patch.translated_to_depth(tip, -RETREAT_HYSTERESIS)
        return ReconcileReport(env=_swap(env, patch, moved),
                               action="retreated")
    if measured and depth > 0.0:
        stiffness = force_mag / depth
        clamped = min(max(stiffness, env.stiffness / STIFFNESS_CLAMP),
                      env.stiffness * STIFFNESS_CLAMP)
        if abs(clamped - env.stiffness) / env.stiffness < 1e-9:
            return ReconcileReport(env=env, action="none")
        return ReconcileReport(env=replace(env, stiffness=clamped),
                               action="stiffness")
    return ReconcileReport(env=env, action="none")


def _swap(env: ProxyEnvironment, old: PlanePatch,
          new: PlanePatch) -> ProxyEnvironment:
    patches = tuple(new if p is old else p for p in env.patches)
    return replace(env, patches=patches)


@dataclass(frozen=True)
class MasterCommand:
    """Clutched master increment for the limb tip target, in meters."""

    increment: tuple[float, float, float]
    clutch_engaged: bool
    scale: float = 1.0


@dataclass(frozen=True)
class TeleopResult:
    tip_target: np.ndarray
    ik: IKResult
    haptic_force: np.ndarray


def teleop_tick(mode: ModeState, target: np.ndarray, command: MasterCommand,
                env: ProxyEnvironment, geom: LimbGeometry,
                seed: LimbConfig | None = None, *,
                step_limit: float = 0.005) -> TeleopResult:
    """One master-rate teleoperation tick.

    Rejects (raises PermissionError) unless the mode allows teleoperation.
    With the clutch engaged the scaled increment moves the tip target,
    rate-limited to ``step_limit`` per tick and kept inside the limb
    workspace; the target feeds limb IK and the haptic force comes from the
    proxy at the commanded target.
    """
    if not teleop_allowed(mode):
        raise PermissionError(
            f"teleoperation not allowed in mode {mode.describe()}")
    target = np.asarray(target, dtype=float).copy()
    if command.clutch_engaged:
        delta = command.scale * np.asarray(command.increment, dtype=float)
        norm = float(np.linalg.norm(delta))
        if norm > step_limit:
            delta *= step_limit / norm
        target = target + delta
    reach = float(np.linalg.norm(target))
    max_reach = 0.999 * geom.length
    if reach > max_reach:
        target *= max_reach / reach
    ik = inverse_kinematics(target, geom, seed=seed)
    haptic = estimate_force(target, None, env)
    return TeleopResult(tip_target=target, ik=ik, haptic_force=haptic)
