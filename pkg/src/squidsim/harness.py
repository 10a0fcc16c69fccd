"""Mission loop: the fixed-rate tick pipeline and the replay log.

Each 100 Hz tick runs, in order: sensing, navigation, mode supervision,
guidance/teleoperation, thrust allocation, propulsion, rigid-body dynamics,
power bookkeeping and the transport session.  Everything downstream of the
seeded RNG is deterministic, so two runs of the same scenario and seed
produce byte-identical logs; the log footer carries a digest over the file
for cheap verification.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from . import comms, nav
from .comms import (LinkKind, LinkStatus, Session, link_available,
                    make_message, session_step)
from .contact import PlanePatch
from .dynamics import VehicleState, Wrench, step_dynamics
from .guidance import LosParams, WaypointPlan, autopilot, depth_autopilot, los_step
from .limbs import (LimbConfig, forward_kinematics, tendon_lengths,
                    tip_contact)
from .mathutil import clamp, wrap_angle
from .modes import (LinkMode, ModeState, NavMode, OpMode, TransitionEvent,
                    TransitionSource, limb_to_world, request_transition,
                    sautpos_step, teleop_allowed)
from .power import FaultKind, PowerSource, PowerState, endurance_estimate, step_power
from .propulsion import (FinMode, FinState, JetState, allocate, fin_wrench,
                         jet_step)
from .scenario import Scenario
from .teleop import (MasterCommand, ProxyEnvironment, TactileMeasurement,
                     build_proxy, reconcile, teleop_tick)

LOG_FORMAT_VERSION = 1


class RuntimeFault(RuntimeError):
    """Raised when a run aborts on a non-recoverable numerical failure."""


def _canonical_line(obj: Mapping[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


@dataclass
class MissionSummary:
    ticks: int
    t_final: float
    plan_done: bool
    waypoints_completed: int
    mode: str
    faults: tuple[str, ...]
    delivered_commands: int
    dropped_frames: int
    digest: str | None

    def to_dict(self) -> dict:
        return {
            "ticks": self.ticks, "t_final": self.t_final,
            "plan_done": self.plan_done,
            "waypoints_completed": self.waypoints_completed,
            "mode": self.mode, "faults": list(self.faults),
            "delivered_commands": self.delivered_commands,
            "dropped_frames": self.dropped_frames, "digest": self.digest,
        }


class ReplayLog:
    """Append-only JSONL mission log with a digest footer.

    Line 1 is a header with the scenario snapshot and seed, then one frame
    per telemetry tick, then a summary whose ``digest`` is the SHA-256 over
    every preceding byte of the file.
    """

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self._hash = hashlib.sha256()
        self._file = self.path.open("w", encoding="utf-8") if self.path else None
        self.frames: list[dict] = []
        self.header: dict | None = None
        self.digest: str | None = None

    def _emit(self, obj: Mapping[str, Any]) -> None:
        line = _canonical_line(obj) + "\n"
        self._hash.update(line.encode("utf-8"))
        if self._file is not None:
            self._file.write(line)

    def write_header(self, scenario: Scenario, seed: int) -> None:
        self.header = {"kind": "header", "format": LOG_FORMAT_VERSION,
                       "seed": seed, "scenario": scenario.to_dict()}
        self._emit(self.header)

    def write_frame(self, frame: Mapping[str, Any]) -> None:
        record = {"kind": "frame", **frame}
        self.frames.append(record)
        self._emit(record)

    def close(self, summary: MissionSummary) -> str:
        digest = self._hash.hexdigest()
        record = dict(summary.to_dict(), kind="summary", digest=digest)
        line = _canonical_line(record) + "\n"
        if self._file is not None:
            self._file.write(line)
            self._file.close()
            self._file = None
        self.digest = digest
        return digest


def _round_floats(obj):
    """Normalize floats for the wire/log: finite, with -0.0 flattened."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise RuntimeFault(f"non-finite value in telemetry: {obj}")
        return obj + 0.0
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


class MissionLoop:
    """Deterministic closed-loop mission executive for one scenario run."""

    def __init__(self, scenario: Scenario, seed: int | None = None,
                 log_path: str | Path | None = None):
        self.scenario = scenario
        self.dt = scenario.dt
        self.seed = scenario.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)
        self.tick_index = 0

        self.truth = scenario.initial_state
        self.mode = scenario.initial_mode
        self.est = nav.NavEstimate.initial(
            x=scenario.initial_state.x, y=scenario.initial_state.y,
            psi=scenario.initial_state.psi)
        self.plan: WaypointPlan | None = scenario.plan
        self.los_params: LosParams = scenario.los
        self.active_wp = 0
        self.cross_track = 0.0
        self.plan_done = scenario.plan is None
        self.speed_integrator = 0.0
        self.hold_pose: tuple[float, float, float] | None = None

        n_limbs = len(scenario.limb_mounts)
        base_config = (scenario.initial_limb_config
                       or LimbConfig.straight(scenario.limb_geometry.n_segments))
        self.limb_configs: list[LimbConfig] = [base_config] * n_limbs
        self.tip_targets: list[np.ndarray] = [
            forward_kinematics(base_config, scenario.limb_geometry).position.copy()
            for _ in range(n_limbs)]
        self.master_queues: list[deque] = [deque() for _ in range(n_limbs)]
        self.haptic: list[float] = [0.0] * n_limbs

        if scenario.depth_sample_clusters:
            clusters = [np.asarray(c, dtype=float)
                        for c in scenario.depth_sample_clusters]
            self.proxy: ProxyEnvironment | None = build_proxy(
                clusters, stiffness=scenario.contact_stiffness,
                damping=scenario.proxy_damping)
        else:
            self.proxy = None

        self.fin_states: tuple[FinState, ...] = tuple(
            FinState(id=fid) for fid in sorted(scenario.fins.mounts))
        self.fin_override: list[FinState] | None = None
        self.jet = JetState()
        self.jet_command = {"pump_rate": 0.0, "valve_open": False,
                            "nozzle_angle": 0.0}

        self.power = PowerState(
            source=(PowerSource.UMBILICAL
                    if self.mode.link is LinkMode.TET else PowerSource.BATTERY),
            soc_wh=scenario.power.capacity_wh)
        self.active_faults: list[str] = []
        self.pending_faults: list = []

        self.session = Session()
        self.link_status = self._evaluate_link()
        self.outbox: deque[bytes] = deque(maxlen=512)
        self.pending_commands: list[dict] = []
        self.external_incoming: deque = deque()
        self.script = deque(scenario.scripted_commands)
        self.script_seq = 0
        self.estop = False
        self.events: list[str] = []
        self._frame_delivered: list[dict] = []
        self._frame_rejections: list[dict] = []
        self.log = ReplayLog(log_path)
        self.log.write_header(scenario, self.seed)
        self.summary: MissionSummary | None = None

    # ---- external command injection (operator console / server) ----

    def inject_command(self, raw: bytes | Mapping[str, Any]) -> None:
        """Queue operator input (raw bytes or a message dict) for this tick."""
        self.external_incoming.append(raw)

    # ---- link & telemetry helpers ----

    def _evaluate_link(self) -> LinkStatus:
        depth = self.truth.z
        dx = self.scenario.base_station[0] - self.truth.x
        dy = self.scenario.base_station[1] - self.truth.y
        range_m = math.hypot(dx, dy)
        bearing = math.atan2(dy, dx)
        alignment = abs(math.degrees(wrap_angle(bearing - self.truth.psi)))
        if self.mode.link is LinkMode.TET:
            return link_available(comms.DEFAULT_LINKS[LinkKind.UMBILICAL])
        vlc = link_available(comms.DEFAULT_LINKS[LinkKind.VLC], depth=depth,
                             range_m=range_m, alignment_deg=alignment)
        if vlc.available:
            return vlc
        return link_available(comms.DEFAULT_LINKS[LinkKind.LTE_WIFI],
                              depth=depth)

    def _nowire_available(self) -> bool:
        depth = self.truth.z
        dx = self.scenario.base_station[0] - self.truth.x
        dy = self.scenario.base_station[1] - self.truth.y
        range_m = math.hypot(dx, dy)
        bearing = math.atan2(dy, dx)
        alignment = abs(math.degrees(wrap_angle(bearing - self.truth.psi)))
        vlc = link_available(comms.DEFAULT_LINKS[LinkKind.VLC], depth=depth,
                             range_m=range_m, alignment_deg=alignment)
        lte = link_available(comms.DEFAULT_LINKS[LinkKind.LTE_WIFI],
                             depth=depth)
        return vlc.available or lte.available

    def telemetry_body(self) -> dict:
        limbs = []
        geom = self.scenario.limb_geometry
        for i, config in enumerate(self.limb_configs):
            pose = forward_kinematics(config, geom)
            tendons = tendon_lengths(config, geom)
            limbs.append({
                "id": f"limb-{i}",
                "tip": [float(x) for x in pose.position],
                "direction": [float(x) for x in pose.direction],
                "tendon_dl": [float(x) for x in tendons.length_change],
            })
        hours, unbounded = endurance_estimate(self.power)
        body = {
            "vehicle": {"x": self.truth.x, "y": self.truth.y,
                        "z": self.truth.z, "psi": self.truth.psi,
                        "u": self.truth.u, "v": self.truth.v,
                        "r": self.truth.r, "w": self.truth.w},
            "nav": {"x": float(self.est.mean[0]), "y": float(self.est.mean[1]),
                    "psi": float(self.est.mean[2]),
                    "cov": [float(x) for x in self.est.cov.reshape(-1)]},
            "mode": {"op": self.mode.op.value, "nav": self.mode.nav.value,
                     "link": self.mode.link.value},
            "limbs": limbs,
            "power": {"source": self.power.source.value,
                      "soc_wh": self.power.soc_wh,
                      "bus_v": self.power.bus_voltage,
                      "total_w": self.power.total_load_w,
                      "mean_w": self.power.rolling_mean_w,
                      "endurance_h": None if unbounded else hours},
            "link": {"kind": self.link_status.kind.value,
                     "available": self.link_status.available,
                     "bandwidth_kbps": self.link_status.bandwidth_kbps,
                     "latency_ms": self.link_status.latency_s * 1000.0},
            "faults": list(self.active_faults),
            "guidance": {"active_waypoint": self.active_wp,
                         "cross_track_error": self.cross_track,
                         "done": self.plan_done},
        }
        return _round_floats(body)

    # ---- command handling ----

    def _enter_hold(self, reason: str) -> None:
        self.hold_pose = (float(self.est.mean[0]), float(self.est.mean[1]),
                          float(self.est.mean[2]))
        self.events.append(f"hold-engaged: {reason}")

    def _force_fault_mode(self, reason: str) -> None:
        result = request_transition(
            self.mode,
            TransitionEvent(target=self.mode, source=TransitionSource.FAULT),
            link_available=True)
        if result.state != self.mode:
            self.events.append(
                f"mode-forced: {result.state.describe()} ({reason})")
        self.mode = result.state
        self.fin_override = None
        self._enter_hold(reason)

    def _apply_command(self, command: dict) -> None:
        kind = command["kind"]
        if kind == "emergency_stop":
            self.estop = True
            self.jet_command = {"pump_rate": 0.0, "valve_open": False,
                                "nozzle_angle": 0.0}
            self._force_fault_mode("emergency-stop")
            self.events.append(f"emergency-stop: {command['id']}")
            return
        if kind == "mode_transition":
            target = ModeState(op=OpMode(command["target"]["op"]),
                               nav=NavMode(command["target"]["nav"]),
                               link=LinkMode(command["target"]["link"]))
            result = request_transition(
                self.mode,
                TransitionEvent(target=target,
                                source=TransitionSource.OPERATOR),
                link_available=self._nowire_available())
            if result.accepted:
                previous = self.mode
                self.mode = result.state
                self.estop = False
                if self.mode.nav is not previous.nav:
                    self.fin_override = None
                    self.speed_integrator = 0.0
                if self.mode.nav in (NavMode.MANCON, NavMode.SAUTPOS):
                    self._enter_hold(f"entered {self.mode.nav.value}")
                else:
                    self.hold_pose = None
                self.events.append(f"mode-accepted: {self.mode.describe()}")
            else:
                self.events.append(
                    f"mode-rejected: {target.describe()} ({result.reason.value})")
            return
        if kind == "waypoint_upload":
            self.plan = WaypointPlan(
                waypoints=tuple((float(x), float(y))
                                for x, y in command["waypoints"]),
                acceptance_radius=float(command.get("acceptance_radius", 1.0)),
                cruise_speed=float(command.get("cruise_speed", 0.8)))
            self.active_wp = 0
            self.plan_done = False
            self.hold_pose = None
            self.events.append(
                f"plan-accepted: {len(self.plan.waypoints)} waypoints")
            return
        if kind == "fin_override":
            params = self.scenario.fins
            states = []
            for fin in command["fins"]:
                if fin["id"] not in params.mounts:
                    self.events.append(f"fin-override-unknown-id: {fin['id']}")
                    return
                states.append(FinState(
                    id=fin["id"],
                    swivel=clamp(float(fin["swivel"]), -math.pi / 2,
                                 math.pi / 2),
                    mode=FinMode(fin["mode"]),
                    amplitude=clamp(float(fin["amplitude"]), 0.0,
                                    params.amplitude_max),
                    frequency=clamp(float(fin["frequency"]), 0.0,
                                    params.frequency_max),
                    phase=float(fin.get("phase", 0.0))))
            self.fin_override = states
            self.events.append(f"fin-override: {len(states)} fins")
            return
        if kind == "limb_master":
            index = int(command["limb"])
            if index >= len(self.master_queues):
                self.events.append(f"limb-master-unknown-limb: {index}")
                return
            self.master_queues[index].append(MasterCommand(
                increment=tuple(float(x) for x in command["increment"]),
                clutch_engaged=bool(command["clutch"]),
                scale=float(command.get("scale", 1.0))))
            return
        if kind == "jet_fire":
            self.jet_command = {
                "pump_rate": clamp(float(command["pump_rate"]), 0.0,
                                   self.scenario.jet.pump_max),
                "valve_open": bool(command["valve_open"]),
                "nozzle_angle": clamp(float(command["nozzle_angle"]),
                                      -math.pi / 2, math.pi / 2)}
            self.events.append("jet-command")
            return
        self.events.append(f"command-ignored: {kind}")

    # ---- teleoperation & tactile ----

    def _tactile_force(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """Truth contact force on limb ``index`` tip, in the limb frame."""
        geom = self.scenario.limb_geometry
        pose = forward_kinematics(self.limb_configs[index], geom)
        force = np.zeros(3)
        limb_patches = [p.patch for p in self.scenario.contact_planes
                        if p.frame == "limb" and p.limb_index == index]
        if limb_patches:
            force = force + tip_contact(pose, limb_patches,
                                        self.scenario.contact_stiffness)
        world_patches = [p.patch for p in self.scenario.contact_planes
                         if p.frame == "world"]
        if world_patches:
            mount = self.scenario.limb_mounts[index]
            tip_world = limb_to_world(pose.position, self.truth, mount)
            world_pose = type(pose)(position=tip_world,
                                    direction=pose.direction)
            f_world = tip_contact(world_pose, world_patches,
                                  self.scenario.contact_stiffness)
            c, s = math.cos(self.truth.psi), math.sin(self.truth.psi)
            r_world = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            rot = r_world @ mount.rotation_matrix()
            force = force + rot.T @ f_world
        return force, pose.position

    def _teleop_step(self) -> None:
        if not teleop_allowed(self.mode) or self.proxy is None:
            self.haptic = [0.0] * len(self.haptic)
            return
        geom = self.scenario.limb_geometry
        for i in range(len(self.limb_configs)):
            command = (self.master_queues[i].popleft()
                       if self.master_queues[i] else None)
            if command is not None:
                result = teleop_tick(self.mode, self.tip_targets[i], command,
                                     self.proxy, geom,
                                     seed=self.limb_configs[i])
                self.tip_targets[i] = result.tip_target
                self.limb_configs[i] = result.ik.config
                self.haptic[i] = float(np.linalg.norm(result.haptic_force))
                if not result.ik.converged:
                    self.events.append(
                        f"limb-ik-residual: limb {i} {result.ik.residual:.2e}")
            force, tip_local = self._tactile_force(i)
            report = reconcile(self.proxy, TactileMeasurement(
                force=force, tip_position=tip_local))
            if report.action != "none":
                self.events.append(f"proxy-reconciled: {report.action}")
            self.proxy = report.env

    # ---- main loop ----

    def _depth_setpoint(self, t: float) -> float:
        depth = self.scenario.initial_state.z
        for entry_t, entry_depth in self.scenario.depth_schedule:
            if t >= entry_t:
                depth = entry_depth
        return depth

    def tick(self) -> dict | None:
        """Advance one base-rate tick; returns the frame on telemetry ticks."""
        scenario = self.scenario
        k = self.tick_index
        dt = self.dt
        t0 = self.truth.t

        # 1. Sense.
        frame = nav.sense(self.truth, scenario.landmarks, scenario.noise,
                          self.rng)

        # 2. Navigate: predict every tick, correct at the sensor rates.
        self.est = nav.predict(self.est, frame, dt)
        if k % scenario.rates.sonar == 0 and frame.detections:
            self.est, _ = nav.update(self.est, frame.detections,
                                     scenario.landmarks, scenario.noise)
        if k % scenario.rates.gnss == 0 and frame.gnss is not None:
            self.est = nav.gnss_reset(self.est, frame.gnss, self.truth.z,
                                      scenario.noise)

        # 3. Supervise modes: faults first, then operator commands.
        for fault in self.pending_faults:
            label = (f"{fault.kind.value}:{fault.subsystem}"
                     if fault.subsystem else fault.kind.value)
            if label not in self.active_faults:
                self.active_faults.append(label)
            if fault.kind in (FaultKind.BATTERY_DEPLETED,
                              FaultKind.OVERCURRENT,
                              FaultKind.UNDERVOLTAGE):
                self._force_fault_mode(label)
        self.pending_faults = []
        if (self.mode.link is LinkMode.NOWIRE
                and self.mode.nav is not NavMode.AUTNAV
                and not self._nowire_available()):
            self._force_fault_mode("link-lost")
        for command in self.pending_commands:
            self._apply_command(command)
        self.pending_commands = []

        # 4. Guidance / teleoperation, on the navigation estimate.
        control_state = VehicleState(
            x=float(self.est.mean[0]), y=float(self.est.mean[1]),
            z=frame.depth, psi=float(self.est.mean[2]),
            u=frame.dvl_u, v=frame.dvl_v, r=frame.imu_yaw_rate,
            w=self.truth.w, t=t0)
        if k % scenario.rates.master == 0:
            self._teleop_step()
        tau_cmd = Wrench.zero()
        if self.estop:
            tau_cmd = Wrench.zero()
        elif self.mode.nav is NavMode.AUTNAV:
            if self.hold_pose is not None:
                tau_cmd = sautpos_step(control_state, (), self.hold_pose, (),
                                       scenario.limb_geometry.length).wrench
            elif self.plan is not None and not self.plan_done:
                los = los_step(control_state, self.plan, self.active_wp,
                               self.los_params, dt)
                self.los_params = los.params
                self.active_wp = los.active_index
                self.cross_track = los.cross_track_error
                if los.done and not self.plan_done:
                    self.plan_done = True
                    self.events.append("plan-complete")
                wrench, self.speed_integrator = autopilot(
                    control_state, los.heading, los.speed,
                    scenario.autopilot, self.speed_integrator, dt)
                tau_cmd = wrench
            else:
                wrench, self.speed_integrator = autopilot(
                    control_state, control_state.psi, 0.0,
                    scenario.autopilot, self.speed_integrator, dt)
                tau_cmd = wrench
        elif self.mode.nav is NavMode.MANCON:
            if self.hold_pose is None:
                self._enter_hold("MANCON assist")
            tau_cmd = sautpos_step(control_state, (), self.hold_pose, (),
                                   scenario.limb_geometry.length).wrench
        else:  # SAUTPOS
            if self.hold_pose is None:
                self._enter_hold("SAUTPOS assist")
            targets_world = [
                limb_to_world(self.tip_targets[i], control_state,
                              scenario.limb_mounts[i])
                for i in range(len(self.tip_targets))]
            tau_cmd = sautpos_step(control_state, targets_world,
                                   self.hold_pose, scenario.limb_mounts,
                                   scenario.limb_geometry.length).wrench
        depth_force = depth_autopilot(control_state,
                                      self._depth_setpoint(t0),
                                      scenario.depth_gains)

        # 5. Allocate and 6. actuate.
        propulsion_dead = ("propulsion" in self.power.shed
                           or (self.power.source is PowerSource.BATTERY
                               and self.power.soc_wh <= 0.0))
        if self.estop or propulsion_dead:
            self.fin_states = tuple(FinState(id=f.id) for f in self.fin_states)
            fin_force = Wrench.zero()
            saturated = False
        elif self.fin_override is not None:
            self.fin_states = tuple(self.fin_override)
            fin_force = fin_wrench(self.fin_states, scenario.fins)
            saturated = False
        else:
            allocation = allocate(
                Wrench(X=tau_cmd.X, Y=tau_cmd.Y, N=tau_cmd.N),
                self.fin_states, scenario.fins)
            self.fin_states = allocation.fins
            fin_force = allocation.achieved
            saturated = allocation.saturated
        if self.estop or propulsion_dead:
            jet_force = Wrench.zero()
            self.jet, _ = jet_step(self.jet, 0.0, False,
                                   self.jet.nozzle_angle, scenario.jet, dt)
        else:
            self.jet, jet_force = jet_step(
                self.jet, self.jet_command["pump_rate"],
                self.jet_command["valve_open"],
                self.jet_command["nozzle_angle"], scenario.jet, dt)
        heave = 0.0 if (self.estop or propulsion_dead) else depth_force
        tau_total = Wrench(X=fin_force.X + jet_force.X,
                           Y=fin_force.Y + jet_force.Y,
                           N=fin_force.N + jet_force.N, Z=heave)

        # 7. Dynamics.
        self.truth = step_dynamics(self.truth, tau_total, scenario.vehicle, dt)

        # 8. Power.
        masters_served = 1 if (k % scenario.rates.master == 0
                               and teleop_allowed(self.mode)) else 0
        pumping = (self.jet_command["pump_rate"] > 0.0
                   and not (self.estop or propulsion_dead))
        loads = {
            "computers": scenario.base_loads.get("computers", 40.0),
            "comms": scenario.base_loads.get("comms", 15.0),
            "payload": scenario.base_loads.get("payload", 20.0),
            "propulsion": (12.0 + 30.0 * (abs(fin_force.X) + abs(fin_force.Y))
                           + 5.0 * abs(fin_force.N) + abs(heave)
                           + (50.0 if pumping else 0.0)),
            "limbs": 8.0 + 60.0 * masters_served,
        }
        source = (PowerSource.UMBILICAL if self.mode.link is LinkMode.TET
                  else PowerSource.BATTERY)
        self.power = step_power(self.power, loads, source, scenario.power, dt)
        self.pending_faults = list(self.power.faults)

        # 9. Transport.
        self.link_status = self._evaluate_link()
        incoming: list = []
        while self.script and self.script[0].t <= t0 + dt - 1e-12:
            entry = self.script.popleft()
            message = make_message("command", self.script_seq, t0 + dt,
                                   entry.body)
            self.script_seq += 1
            incoming.append(comms.encode_message(message))
        while self.external_incoming:
            incoming.append(self.external_incoming.popleft())
        frames = []
        telemetry = None
        if k % scenario.rates.telemetry == 0:
            telemetry = self.telemetry_body()
            frames.append(telemetry)
        result = session_step(self.session, frames, incoming,
                              self.link_status, self.mode, dt)
        self.pending_commands.extend(result.delivered_commands)
        self._frame_delivered.extend(dict(c) for c in
                                     result.delivered_commands)
        self._frame_rejections.extend(r["body"] for r in result.rejections)
        for data in result.transmitted_frames:
            self.outbox.append(data)

        record = None
        if telemetry is not None:
            record = {
                "tick": k, "t": self.truth.t, "telemetry": telemetry,
                "events": list(self.events),
                "delivered": self._frame_delivered,
                "rejections": self._frame_rejections,
                "saturated": saturated,
                "haptic": [float(h) for h in self.haptic],
            }
            self.events = []
            self._frame_delivered = []
            self._frame_rejections = []
            self.log.write_frame(_round_floats(record))
        self.tick_index += 1
        return record

    def run(self, duration: float | None = None,
            on_frame: Callable[[dict], None] | None = None) -> MissionSummary:
        """Run to ``duration`` (default: the scenario's), closing the log."""
        total = self.scenario.duration if duration is None else duration
        ticks = int(round(total / self.dt))
        for _ in range(ticks):
            record = self.tick()
            if record is not None and on_frame is not None:
                on_frame(record)
        self.summary = MissionSummary(
            ticks=self.tick_index, t_final=self.truth.t,
            plan_done=self.plan_done,
            waypoints_completed=self.active_wp,
            mode=self.mode.describe(), faults=tuple(self.active_faults),
            delivered_commands=self.session.delivered_count,
            dropped_frames=self.session.dropped_frames, digest=None)
        digest = self.log.close(self.summary)
        self.summary = MissionSummary(**{**self.summary.__dict__,
                                         "digest": digest})
        return self.summary


# ---- replay ----


def read_log(path: str | Path) -> tuple[dict, list[dict], dict]:
    """Parse a mission log into (header, frames, summary)."""
    header = None
    frames = []
    summary = None
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            kind = obj.get("kind")
            if kind == "header":
                header = obj
            elif kind == "frame":
                frames.append(obj)
            elif kind == "summary":
                summary = obj
    if header is None or summary is None:
        raise ValueError("log is missing its header or summary line")
    return header, frames, summary


def verify_log(path: str | Path) -> str:
    """Recompute the log digest; raises ValueError on mismatch."""
    digest = hashlib.sha256()
    recorded = None
    with Path(path).open("rb") as handle:
        for line in handle:
            obj = json.loads(line)
            if obj.get("kind") == "summary":
                recorded = obj.get("digest")
                break
            digest.update(line if line.endswith(b"\n") else line + b"\n")
    computed = digest.hexdigest()
    if recorded != computed:
        raise ValueError(f"log digest mismatch: recorded {recorded}, "
                         f"computed {computed}")
    return computed


def extract_series(frames: list[dict], query: str) -> list:
    """Pull one dotted-path series (e.g. ``telemetry.vehicle.x``) from frames.

    Bare ``t`` and ``tick`` address the frame itself; anything else starts
    at the frame root.  Missing fields raise KeyError with the query name.
    """
    out = []
    for frame in frames:
        node: Any = frame
        for part in query.split("."):
            if isinstance(node, list):
                node = node[int(part)]
            elif isinstance(node, dict):
                if part not in node:
                    raise KeyError(f"no field {query!r} in frame")
                node = node[part]
            else:
                raise KeyError(f"no field {query!r} in frame")
        out.append(node)
    return out


def export_csv(path: str | Path, out_path: str | Path,
               queries: list[str]) -> int:
    """Write selected frame series to CSV; returns the number of rows."""
    _, frames, _ = read_log(path)
    columns = [extract_series(frames, q) for q in queries]
    with Path(out_path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(queries)
        for row in zip(*columns):
            writer.writerow(row)
    return len(frames)
