"""Biomimetic propulsion: lateral fins, pulsed water jet, and fin allocation.

Each fin produces a cycle-averaged thrust T = k_t * eta(mode) * amplitude^2 *
frequency^2 directed along its swivel angle in the body plane (eta is 1 for
single-wave flapping, a configured factor below 1 for traveling-wave
undulation).  The jet stores pumped water in an elastic mantle (pressure
proportional to stored volume) and discharges through a steerable nozzle.
Fin allocation solves a least-squares wrench distribution over per-fin force
vectors with the swivel range limited to +/- 90 degrees from the body x-axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .dynamics import Wrench
from .mathutil import clamp

FIN_IDS = ("bow-port", "bow-stbd", "stern-port", "stern-stbd",
           "center-port", "center-stbd")

_DEFAULT_MOUNTS = {
    "bow-port": (0.45, -0.12),
    "bow-stbd": (0.45, 0.12),
    "stern-port": (-0.45, -0.12),
    "stern-stbd": (-0.45, 0.12),
}


class FinMode(str, enum.Enum):
    """Fin actuation mode: single-wave flapping or traveling-wave undulation."""

    SW = "SW"
    TW = "TW"


@dataclass(frozen=True)
class FinParams:
    """Shared fin constants and mount geometry.

    ``mounts`` maps fin id to its lever arm (x, y) in the body frame.  The
    optional central pair is geometrically identical to the others and is
    enabled simply by listing its mounts.
    """

    thrust_coeff: float = 1.2
    tw_efficiency: float = 0.7
    amplitude_max: float = 0.5
    frequency_max: float = 3.0
    mounts: Mapping[str, tuple[float, float]] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.mounts is None:
            object.__setattr__(self, "mounts", dict(_DEFAULT_MOUNTS))

    def validate(self) -> None:
        if not self.thrust_coeff > 0.0:
            raise ValueError("thrust coefficient must be > 0")
        if not 0.0 < self.tw_efficiency <= 1.0:
            raise ValueError("traveling-wave efficiency must be in (0, 1]")
        if len(self.mounts) < 4:
            raise ValueError("at least four fins are required")
        for fin_id in self.mounts:
            if fin_id not in FIN_IDS:
                raise ValueError(f"unknown fin id {fin_id!r}")

    def efficiency(self, mode: FinMode) -> float:
        return 1.0 if mode is FinMode.SW else self.tw_efficiency

    def max_thrust(self, mode: FinMode) -> float:
        return (self.thrust_coeff * self.efficiency(mode)
                * self.amplitude_max ** 2 * self.frequency_max ** 2)


@dataclass(frozen=True)
class FinState:
    """Command state of one fin.

    ``swivel`` is the force direction in the body plane, limited to
    [-pi/2, pi/2] about the body x-axis.  ``phase`` only matters for gait
    coordination; the cycle-averaged thrust is independent of it.
    """

    id: str
    swivel: float = 0.0
    mode: FinMode = FinMode.SW
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def validate(self, params: FinParams) -> None:
        if self.id not in params.mounts:
            raise ValueError(f"unknown fin id {self.id!r}")
        if abs(self.swivel) > math.pi / 2 + 1e-12:
            raise ValueError("swivel out of range [-pi/2, pi/2]")
        if not 0.0 <= self.amplitude <= params.amplitude_max + 1e-12:
            raise ValueError("amplitude out of range")
        if not 0.0 <= self.frequency <= params.frequency_max + 1e-12:
            raise ValueError("frequency out of range")


def fin_thrust(fin: FinState, params: FinParams) -> float:
    """Cycle-averaged thrust magnitude of one fin in newtons."""
    coeff = params.thrust_coeff * params.efficiency(fin.mode)
    return coeff * fin.amplitude ** 2 * fin.frequency ** 2


def fin_wrench(fins: Sequence[FinState], params: FinParams) -> Wrench:
    """Total body wrench produced by a set of fins."""
    params.validate()
    x_total = y_total = n_total = 0.0
    for fin in fins:
        fin.validate(params)
        thrust = fin_thrust(fin, params)
        fx = thrust * math.cos(fin.swivel)
        fy = thrust * math.sin(fin.swivel)
        mx, my = params.mounts[fin.id]
        x_total += fx
        y_total += fy
        n_total += mx * fy - my * fx
    return Wrench(X=x_total, Y=y_total, N=n_total, Z=0.0)


@dataclass(frozen=True)
class AllocationResult:
    fins: tuple[FinState, ...]
    achieved: Wrench
    saturated: bool


def _effectiveness(params: FinParams, fin_ids: Sequence[str]) -> np.ndarray:
    """3 x 2n matrix mapping per-fin planar forces to the body wrench."""
    cols = []
    for fin_id in fin_ids:
        mx, my = params.mounts[fin_id]
        cols.append([1.0, 0.0, -my])   # force along body x
        cols.append([0.0, 1.0, mx])    # force along body y
    return np.array(cols).T


def _solve_forward_cone(b_mat: np.ndarray, tau: np.ndarray,
                        n_fins: int) -> np.ndarray:
    """Minimum-norm force solution with the forward components kept >= 0.

    Starts from the unconstrained pseudo-inverse solution and pins negative
    forward components to zero (the swivel cannot point a fin backwards),
    re-solving on the remaining columns until the cone constraint holds.
    """
    pinned: set[int] = set()
    forces = np.zeros(2 * n_fins)
    for _ in range(n_fins + 1):
        free = [c for c in range(2 * n_fins)
                if not (c % 2 == 0 and c // 2 in pinned)]
        sol = np.linalg.pinv(b_mat[:, free], rcond=1e-10) @ tau
        forces = np.zeros(2 * n_fins)
        forces[free] = sol
        violating = {i for i in range(n_fins) if forces[2 * i] < -1e-12}
        new = violating - pinned
        if not new:
            break
        pinned |= new
    for i in pinned:
        forces[2 * i] = 0.0
    return forces


def allocate(tau: Wrench, fins: Sequence[FinState],
             params: FinParams) -> AllocationResult:
    """Distribute a desired planar wrench over the fins.

    Solves the least-squares force distribution via the effectiveness-matrix
    pseudo-inverse, projects each fin force into its reachable half-plane
    (swivel within +/- pi/2), and scales all forces together when any fin
    exceeds its thrust limit so the achieved wrench keeps the requested
    direction.  The jet is never allocated.  ``saturated`` is set whenever
    the achieved wrench differs from the request.
    """
    params.validate()
    if len(fins) < 4:
        raise ValueError("allocation requires at least four fins")
    fin_ids = [fin.id for fin in fins]
    for fin in fins:
        fin.validate(params)

    b_mat = _effectiveness(params, fin_ids)
    tau_vec = np.array([tau.X, tau.Y, tau.N])
    forces = _solve_forward_cone(b_mat, tau_vec, len(fins))

    limits = np.array([params.max_thrust(fin.mode) for fin in fins])
    magnitudes = np.hypot(forces[0::2], forces[1::2])
    over = magnitudes > limits
    if np.any(over):
        forces = forces * float(np.min(limits[over] / magnitudes[over]))
        magnitudes = np.hypot(forces[0::2], forces[1::2])

    commands = []
    for i, fin in enumerate(fins):
        thrust = float(magnitudes[i])
        if thrust > 1e-12:
            swivel = math.atan2(forces[2 * i + 1], forces[2 * i])
        else:
            swivel = 0.0
        swivel = clamp(swivel, -math.pi / 2, math.pi / 2)
        coeff = params.thrust_coeff * params.efficiency(fin.mode)
        amplitude = params.amplitude_max
        frequency = math.sqrt(thrust / (coeff * amplitude ** 2))
        frequency = clamp(frequency, 0.0, params.frequency_max)
        commands.append(replace(fin, swivel=swivel, amplitude=amplitude,
                                frequency=frequency))

    achieved = fin_wrench(commands, params)
    saturated = (abs(achieved.X - tau.X) > 1e-9
                 or abs(achieved.Y - tau.Y) > 1e-9
                 or abs(achieved.N - tau.N) > 1e-9)
    return AllocationResult(fins=tuple(commands), achieved=achieved,
                            saturated=saturated)


@dataclass(frozen=True)
class JetParams:
    """Pulsed-jet constants.

    Volume is tracked in liters; pressure = elastic_coeff * volume (kPa),
    outflow = discharge_coeff * sqrt(pressure) (L/s) while the valve is open,
    and thrust = thrust_coeff * outflow^2 directed along the nozzle angle.
    ``nozzle_mount`` is the nozzle position in the body frame.
    """

    capacity: float = 2.0
    elastic_coeff: float = 50.0
    discharge_coeff: float = 0.2
    thrust_coeff: float = 5.0
    pump_max: float = 0.25
    nozzle_mount: tuple[float, float] = (0.2, 0.0)

    def validate(self) -> None:
        if not self.capacity > 0.0:
            raise ValueError("jet capacity must be > 0")
        if min(self.elastic_coeff, self.discharge_coeff,
               self.thrust_coeff) <= 0.0:
            raise ValueError("jet coefficients must be > 0")
        if self.pump_max < 0.0:
            raise ValueError("pump rate limit must be >= 0")


@dataclass(frozen=True)
class JetState:
    """Mantle charge state plus the active nozzle command."""

    stored_volume: float = 0.0
    pressure: float = 0.0
    valve_open: bool = False
    nozzle_angle: float = 0.0

    def validate(self, params: JetParams) -> None:
        if not 0.0 <= self.stored_volume <= params.capacity + 1e-12:
            raise ValueError("stored volume out of [0, capacity]")


def jet_step(jet: JetState, pump_rate: float, valve_open: bool,
             nozzle_angle: float, params: JetParams,
             dt: float) -> tuple[JetState, Wrench]:
    """Advance the jet by ``dt``: pump into the mantle and/or discharge.

    With the valve closed the pump charges the mantle (clamped at capacity)
    and the thrust is zero.  With the valve open the mantle discharges at
    outflow = discharge_coeff * sqrt(pressure), limited so the expelled
    volume never exceeds the stored volume, producing thrust along the
    nozzle direction.
    """
    params.validate()
    jet.validate(params)
    if not 0.0 < dt <= 0.1:
        raise ValueError("dt must be in (0, 0.1]")
    pump = clamp(pump_rate, 0.0, params.pump_max)

    volume = jet.stored_volume
    thrust = 0.0
    if valve_open:
        pressure = params.elastic_coeff * volume
        outflow = min(params.discharge_coeff * math.sqrt(pressure),
                      volume / dt)
        thrust = params.thrust_coeff * outflow ** 2
        volume -= outflow * dt
    volume = clamp(volume + pump * dt, 0.0, params.capacity)

    fx = thrust * math.cos(nozzle_angle)
    fy = thrust * math.sin(nozzle_angle)
    mx, my = params.nozzle_mount
    wrench = Wrench(X=fx, Y=fy, N=mx * fy - my * fx, Z=0.0)
    new_state = JetState(stored_volume=volume,
                         pressure=params.elastic_coeff * volume,
                         valve_open=valve_open,
                         nozzle_angle=nozzle_angle)
    return new_state, wrench
