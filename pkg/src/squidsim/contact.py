"""Bounded plane patches and penetration queries shared by limbs and teleop.

A patch is a plane {p : n . p = offset} with a rectangular extent around a
center point.  Free space lies on the normal side (n . p > offset); the
penetration depth of a point is d = offset - n . p when positive.  Contact
forces act along the stored normal, pushing a penetrating point back into
free space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


def _orthonormal_tangents(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors spanning the plane orthogonal to ``normal``."""
    helper = np.array([0.0, 0.0, 1.0])
    if abs(normal[2]) > 0.9:
        helper = np.array([1.0, 0.0, 0.0])
    t1 = np.cross(normal, helper)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(normal, t1)
    return t1, t2


@dataclass(frozen=True)
class PlanePatch:
    """A bounded plane: unit normal, offset n . p, center and half extents."""

    normal: tuple[float, float, float]
    offset: float
    center: tuple[float, float, float]
    half_extents: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if not math.isfinite(norm) or norm < 1e-12:
            raise ValueError("patch normal must be a nonzero finite vector")
        object.__setattr__(self, "normal",
                           tuple(float(x) for x in n / norm))
        object.__setattr__(self, "offset", float(self.offset) / norm)
        object.__setattr__(self, "center",
                           tuple(float(x) for x in self.center))
        object.__setattr__(self, "half_extents",
                           tuple(float(x) for x in self.half_extents))
        if min(self.half_extents) <= 0.0:
            raise ValueError("patch extents must be > 0")

    @property
    def normal_vec(self) -> np.ndarray:
        return np.asarray(self.normal)

    @property
    def center_vec(self) -> np.ndarray:
        return np.asarray(self.center)

    def signed_distance(self, point: np.ndarray) -> float:
        """n . p - offset: positive in free space, negative inside material."""
        return float(self.normal_vec @ np.asarray(point) - self.offset)

    def penetration(self, point: np.ndarray) -> float:
        """Penetration depth (>= 0); zero when the point is in free space."""
        return max(0.0, -self.signed_distance(point))

    def covers_laterally(self, point: np.ndarray) -> bool:
        """True when the point projects inside the patch extent rectangle."""
        t1, t2 = _orthonormal_tangents(self.normal_vec)
        rel = np.asarray(point) - self.center_vec
        return (abs(float(t1 @ rel)) <= self.half_extents[0]
                and abs(float(t2 @ rel)) <= self.half_extents[1])

    def translated_to_depth(self, point: np.ndarray,
                            depth: float) -> "PlanePatch":
        """Copy of the patch shifted along its normal so ``point`` penetrates
        it by exactly ``depth`` (negative depth places the point in free
        space)."""
        new_offset = float(self.normal_vec @ np.asarray(point)) + depth
        shift = (new_offset - self.offset) * self.normal_vec
        return replace(self, offset=new_offset,
                       center=tuple(self.center_vec + shift))


def nearest_patch(point: np.ndarray,
                  patches: tuple[PlanePatch, ...] | list[PlanePatch]
                  ) -> PlanePatch | None:
    """Patch whose surface is closest to ``point``.

    Patches covering the point laterally are preferred; when none do, plain
    plane distance decides.
    """
    if not patches:
        return None
    covering = [p for p in patches if p.covers_laterally(point)]
    pool = covering if covering else list(patches)
    return min(pool, key=lambda p: abs(p.signed_distance(point)))


def contact_force(point: np.ndarray, velocity: np.ndarray | None,
                  patch: PlanePatch | None, stiffness: float,
                  damping: float = 0.0) -> np.ndarray:
    """Kelvin-Voigt contact force at ``point`` against ``patch``.

    F = (k d + b max(0, -v_n)) n with penetration d and normal approach
    velocity v_n; the damping term never pulls (non-sticky contact).
    Returns the zero vector when there is no penetration.
    """
    if patch is None:
        return np.zeros(3)
    depth = patch.penetration(point)
    if depth <= 0.0 or not patch.covers_laterally(point):
        return np.zeros(3)
    magnitude = stiffness * depth
    if velocity is not None and damping > 0.0:
        v_n = float(patch.normal_vec @ np.asarray(velocity))
        magnitude += damping * max(0.0, -v_n)
    return magnitude * patch.normal_vec
