"""Small shared numeric helpers used across the simulator."""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi]."""
    a = math.fmod(angle + math.pi, TWO_PI)
    if a <= 0.0:
        a += TWO_PI
    return a - math.pi


def rot2(psi: float) -> np.ndarray:
    """2x2 rotation matrix mapping body-frame vectors into the plane frame."""
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s], [s, c]])


def clamp(value: float, lo: float, hi: float) -> float:
    """Clamp ``value`` into the closed interval [lo, hi]."""
    return lo if value < lo else hi if value > hi else value


def all_finite(*values: float) -> bool:
    """True when every argument is a finite float."""
    return all(math.isfinite(v) for v in values)
