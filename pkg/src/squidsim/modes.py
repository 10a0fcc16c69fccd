"""Operating-mode state machine and the shared-autonomy position controller.

The mode space is the product of operation mode (EXP exploration / INT
intervention), navigation mode (AUTNAV autonomous, MANCON manual control,
SAUTPOS semi-autonomous positioning) and link mode (TET tethered / NOWIRE
wireless), 12 combinations in total.  Legality rules:

  - MANCON and SAUTPOS exist only within INT (equivalently EXP => AUTNAV);
  - manual/teleoperation modes require an available command link: TET is
    always available, NOWIRE only when the wireless link currently is;
  - switching the link leg to NOWIRE also requires that link to be available;
  - fault-source transitions are never rejected and force AUTNAV with a
    hold-position order, keeping the current operation and link legs.

Every rejected request carries a machine-readable reason code.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import VehicleState, Wrench
from .mathutil import rot2, wrap_angle


class OpMode(str, enum.Enum):
    EXP = "EXP"
    INT = "INT"


class NavMode(str, enum.Enum):
    AUTNAV = "AUTNAV"
    MANCON = "MANCON"
    SAUTPOS = "SAUTPOS"


class LinkMode(str, enum.Enum):
    TET = "TET"
    NOWIRE = "NOWIRE"


class TransitionSource(str, enum.Enum):
    OPERATOR = "operator"
    AUTONOMY = "autonomy"
    FAULT = "fault"


class ReasonCode(str, enum.Enum):
    ACCEPTED = "accepted"
    INVALID_MODE_COMBINATION = "invalid-mode-combination"
    LINK_UNAVAILABLE = "link-unavailable"


@dataclass(frozen=True)
class ModeState:
    """One point in the 12-state mode space."""

    op: OpMode = OpMode.EXP
    nav: NavMode = NavMode.AUTNAV
    link: LinkMode = LinkMode.TET

    def is_valid(self) -> bool:
        if self.nav in (NavMode.MANCON, NavMode.SAUTPOS):
            return self.op is OpMode.INT
        return True

    def describe(self) -> str:
        return f"{self.op.value}/{self.nav.value}/{self.link.value}"


ALL_MODE_STATES = tuple(
    ModeState(op=op, nav=nav, link=link)
    for op in OpMode for nav in NavMode for link in LinkMode)


@dataclass(frozen=True)
class TransitionEvent:
    target: ModeState
    source: TransitionSource = TransitionSource.OPERATOR


@dataclass(frozen=True)
class TransitionResult:
    accepted: bool
    state: ModeState
    reason: ReasonCode
    hold_position: bool = False


def teleop_allowed(mode: ModeState) -> bool:
    """Teleoperation runs only in INT with MANCON or SAUTPOS."""
    return (mode.op is OpMode.INT
            and mode.nav in (NavMode.MANCON, NavMode.SAUTPOS))


def request_transition(current: ModeState, event: TransitionEvent,
                       link_available: bool = True) -> TransitionResult:
    """Evaluate a mode transition request against the legality rules.

    ``link_available`` reports whether the wireless (NOWIRE) command link is
    currently usable; the tether is assumed always available.  Fault-source
    events ignore the requested target and force AUTNAV hold-position on the
    current operation and link legs; they are never rejected.
    """
    if event.source is TransitionSource.FAULT:
        forced = ModeState(op=current.op, nav=NavMode.AUTNAV,
                           link=current.link)
        return TransitionResult(accepted=True, state=forced,
                                reason=ReasonCode.ACCEPTED,
                                hold_position=True)

    target = event.target
    if not target.is_valid():
        return TransitionResult(accepted=False, state=current,
                                reason=ReasonCode.INVALID_MODE_COMBINATION)
    needs_nowire = target.link is LinkMode.NOWIRE and (
        target.nav in (NavMode.MANCON, NavMode.SAUTPOS)
        or target.link is not current.link)
    if needs_nowire and not link_available:
        return TransitionResult(accepted=False, state=current,
                                reason=ReasonCode.LINK_UNAVAILABLE)
    return TransitionResult(accepted=True, state=target,
                            reason=ReasonCode.ACCEPTED)


@dataclass(frozen=True)
class SautposGains:
    """Station-keeping PD gains and the limb workspace margin."""

    kp_pos: float = 30.0
    kd_pos: float = 50.0
    kp_psi: float = 6.0
    kd_psi: float = 10.0
    workspace_margin: float = 0.9


@dataclass(frozen=True)
class LimbMount:
    """Limb base pose on the hull: position and base-frame axes in body."""

    position: tuple[float, float, float] = (0.55, 0.0, 0.0)
    # Columns are the limb x, y, z axes expressed in the body frame; the
    # default points the limb axis (its z) along the body x-axis.
    rotation: tuple[tuple[float, float, float], ...] = (
        (0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))

    @property
    def rotation_matrix(self) -> np.ndarray:
        return np.array(self.rotation)


def world_to_limb(target_world: np.ndarray, vehicle: VehicleState,
                  mount: LimbMount) -> np.ndarray:
    """Express a world-frame point in the limb base frame."""
    rot = rot2(vehicle.psi)
    rel_world = np.asarray(target_world, dtype=float) - np.array(
        [vehicle.x, vehicle.y, vehicle.z])
    rel_body = np.array([*(rot.T @ rel_world[:2]), rel_world[2]])
    rel_body -= np.asarray(mount.position)
    return mount.rotation_matrix.T @ rel_body


def limb_to_world(point_limb: np.ndarray, vehicle: VehicleState,
                  mount: LimbMount) -> np.ndarray:
    """Express a limb base-frame point in the world frame."""
    rel_body = mount.rotation_matrix @ np.asarray(point_limb, dtype=float)
    rel_body = rel_body + np.asarray(mount.position)
    rot = rot2(vehicle.psi)
    xy = rot @ rel_body[:2]
    return np.array([vehicle.x + xy[0], vehicle.y + xy[1],
                     vehicle.z + rel_body[2]])


@dataclass(frozen=True)
class SautposCommand:
    wrench: Wrench
    limb_targets: tuple[np.ndarray, ...]


def sautpos_step(vehicle: VehicleState, tip_targets_world,
                 hold_pose: tuple[float, float, float],
                 mounts, geom_length: float,
                 gains: SautposGains = SautposGains()) -> SautposCommand:
    """Task-priority shared positioning step.

    Limb tip targets (world frame) are the primary task: each is expressed
    in its limb base frame and clamped into the workspace for IK.  The
    secondary task is a station-keeping PD wrench toward ``hold_pose``;
    when a target lies beyond ``workspace_margin`` of the limb length the
    setpoint shifts by the overflow so the hull closes the gap -- otherwise
    the hull does not fight the reach.
    """
    margin = gains.workspace_margin * geom_length
    setpoint = np.array(hold_pose[:2], dtype=float)
    hold_psi = hold_pose[2]

    limb_targets = []
    for target_world, mount in zip(tip_targets_world, mounts):
        local = world_to_limb(np.asarray(target_world, dtype=float),
                              vehicle, mount)
        reach = float(np.linalg.norm(local))
        if reach > margin:
            clamped = local * (margin / reach)
            overflow_local = local - clamped
            overflow_world = (limb_to_world(local, vehicle, mount)
                              - limb_to_world(clamped, vehicle, mount))
            setpoint = setpoint + overflow_world[:2]
            local = clamped
        limb_targets.append(local)

    rot = rot2(vehicle.psi)
    err_body = rot.T @ (setpoint - np.array([vehicle.x, vehicle.y]))
    wrench = Wrench(
        X=gains.kp_pos * float(err_body[0]) - gains.kd_pos * vehicle.u,
        Y=gains.kp_pos * float(err_body[1]) - gains.kd_pos * vehicle.v,
        N=gains.kp_psi * wrap_angle(hold_psi - vehicle.psi)
          - gains.kd_psi * vehicle.r,
        Z=0.0)
    return SautposCommand(wrench=wrench, limb_targets=tuple(limb_targets))
