"""Scenario configuration: YAML loading, validation and the demo mission.

A scenario fully determines a run together with the RNG seed.  Validation
is collecting: every violated field is reported with its full path (e.g.
``vehicle.mass: must be > 0``) rather than stopping at the first problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .comms import LinkKind
from .contact import PlanePatch
from .dynamics import VehicleParams, VehicleState
from .guidance import AutopilotGains, DepthGains, LosParams, WaypointPlan
from .limbs import LimbConfig, LimbGeometry, forward_kinematics
from .modes import LimbMount, LinkMode, ModeState, NavMode, OpMode
from .nav import Landmark, LandmarkMap, NoiseConfig
from .power import PowerParams
from .propulsion import FinParams, JetParams


class ScenarioError(ValueError):
    """Scenario validation failure listing every violated field path."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(errors))


class _Check:
    """Collects validation errors with full field paths."""

    def __init__(self):
        self.errors: list[str] = []

    def error(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    @staticmethod
    def _join(path: str, key: str) -> str:
        return f"{path}.{key}" if path else key

    def num(self, data: Mapping, key: str, path: str, default: float,
            positive: bool = False, nonnegative: bool = False) -> float:
        value = data.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.error(self._join(path, key), "must be a number")
            return default
        if not math.isfinite(value):
            self.error(self._join(path, key), "must be finite")
            return default
        if positive and value <= 0:
            self.error(self._join(path, key), "must be > 0")
            return default
        if nonnegative and value < 0:
            self.error(self._join(path, key), "must be >= 0")
            return default
        return float(value)

    def integer(self, data: Mapping, key: str, path: str, default: int,
                minimum: int | None = None) -> int:
        value = data.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            self.error(self._join(path, key), "must be an integer")
            return default
        if minimum is not None and value < minimum:
            self.error(self._join(path, key), f"must be >= {minimum}")
            return default
        return value

    def section(self, data: Mapping, key: str, path: str) -> Mapping:
        value = data.get(key, {})
        if not isinstance(value, Mapping):
            self.error(self._join(path, key), "must be a mapping")
            return {}
        return value

    def choice(self, data: Mapping, key: str, path: str, default: str,
               choices: tuple[str, ...]) -> str:
        value = data.get(key, default)
        if not isinstance(value, str) or value not in choices:
            self.error(self._join(path, key), f"must be one of {list(choices)}")
            return default
        return value


@dataclass(frozen=True)
class ScenarioPlane:
    """A truth contact plane, in the world frame or riding a limb base."""

    patch: PlanePatch
    frame: str = "world"  # "world" or "limb"
    limb_index: int = 0


@dataclass(frozen=True)
class ScriptedCommand:
    t: float
    body: dict


@dataclass(frozen=True)
class RateDividers:
    """Tick dividers off the 100 Hz base loop."""

    telemetry: int = 10   # 10 Hz
    master: int = 2       # 50 Hz teleoperation / haptics
    sonar: int = 50       # 2 Hz landmark detections
    gnss: int = 100       # 1 Hz surface fixes


@dataclass(frozen=True)
class Scenario:
    name: str = "unnamed"
    duration: float = 60.0
    dt: float = 0.01
    seed: int = 0
    initial_state: VehicleState = VehicleState()
    initial_mode: ModeState = ModeState()
    vehicle: VehicleParams = VehicleParams()
    fins: FinParams = FinParams()
    jet: JetParams = JetParams()
    limb_geometry: LimbGeometry = LimbGeometry()
    limb_mounts: tuple[LimbMount, ...] = (LimbMount(),)
    initial_limb_config: LimbConfig | None = None
    landmarks: LandmarkMap = LandmarkMap(landmarks=())
    noise: NoiseConfig = NoiseConfig()
    plan: WaypointPlan | None = None
    los: LosParams = LosParams()
    autopilot: AutopilotGains = AutopilotGains()
    depth_gains: DepthGains = DepthGains()
    depth_schedule: tuple[tuple[float, float], ...] = ()
    contact_planes: tuple[ScenarioPlane, ...] = ()
    contact_stiffness: float = 500.0
    proxy_damping: float = 50.0
    depth_sample_clusters: tuple[tuple[tuple[float, float, float], ...],
                                 ...] = ()
    power: PowerParams = PowerParams()
    base_loads: Mapping[str, float] = field(default_factory=lambda: {
        "computers": 40.0, "comms": 15.0, "payload": 20.0})
    base_station: tuple[float, float] = (0.0, 0.0)
    rates: RateDividers = RateDividers()
    scripted_commands: tuple[ScriptedCommand, ...] = ()

    def to_dict(self) -> dict:
        """Plain-data snapshot of the scenario (log header, HTTP endpoint)."""
        return {
            "name": self.name,
            "duration": self.duration,
            "dt": self.dt,
            "seed": self.seed,
            "initial": {
                "x": self.initial_state.x, "y": self.initial_state.y,
                "z": self.initial_state.z, "psi": self.initial_state.psi,
                "mode": {"op": self.initial_mode.op.value,
                         "nav": self.initial_mode.nav.value,
                         "link": self.initial_mode.link.value},
            },
            "vehicle": {
                "mass": self.vehicle.mass,
                "added_mass": list(self.vehicle.added_mass),
                "drag_linear": list(self.vehicle.drag_linear),
                "drag_quadratic": list(self.vehicle.drag_quadratic),
                "length": self.vehicle.length,
                "max_depth": self.vehicle.max_depth,
                "current": list(self.vehicle.current),
            },
            "fins": {
                "thrust_coeff": self.fins.thrust_coeff,
                "tw_efficiency": self.fins.tw_efficiency,
                "amplitude_max": self.fins.amplitude_max,
                "frequency_max": self.fins.frequency_max,
                "mounts": {k: list(v) for k, v in self.fins.mounts.items()},
            },
            "jet": {
                "capacity": self.jet.capacity,
                "elastic_coeff": self.jet.elastic_coeff,
                "discharge_coeff": self.jet.discharge_coeff,
                "thrust_coeff": self.jet.thrust_coeff,
                "pump_max": self.jet.pump_max,
                "nozzle_mount": list(self.jet.nozzle_mount),
            },
            "limb": {
                "length": self.limb_geometry.length,
                "base_radius": self.limb_geometry.base_radius,
                "tip_radius": self.limb_geometry.tip_radius,
                "n_segments": self.limb_geometry.n_segments,
                "mounts": [list(m.position) for m in self.limb_mounts],
                "initial_kappa": (list(self.initial_limb_config.kappa)
                                  if self.initial_limb_config else None),
                "initial_phi": (list(self.initial_limb_config.phi)
                                if self.initial_limb_config else None),
            },
            "landmarks": [{"id": lm.id, "x": lm.x, "y": lm.y}
                          for lm in self.landmarks.landmarks],
            "noise": {
                "dvl_sigma": self.noise.dvl_sigma,
                "imu_sigma": self.noise.imu_sigma,
                "depth_sigma": self.noise.depth_sigma,
                "gnss_sigma": self.noise.gnss_sigma,
                "sonar_range_sigma": self.noise.sonar_range_sigma,
                "sonar_bearing_sigma": self.noise.sonar_bearing_sigma,
                "sonar_max_range": self.noise.sonar_max_range,
            },
            "plan": (None if self.plan is None else {
                "waypoints": [list(wp) for wp in self.plan.waypoints],
                "acceptance_radius": self.plan.acceptance_radius,
                "cruise_speed": self.plan.cruise_speed,
            }),
            "los": {"lookahead": self.los.lookahead, "gamma": self.los.gamma},
            "depth_schedule": [list(entry) for entry in self.depth_schedule],
            "environment": {
                "contact_planes": [{
                    "normal": list(p.patch.normal),
                    "offset": p.patch.offset,
                    "center": list(p.patch.center),
                    "half_extents": list(p.patch.half_extents),
                    "frame": p.frame,
                    "limb_index": p.limb_index,
                } for p in self.contact_planes],
                "contact_stiffness": self.contact_stiffness,
                "proxy_damping": self.proxy_damping,
                "depth_sample_clusters": [
                    [list(pt) for pt in cluster]
                    for cluster in self.depth_sample_clusters],
            },
            "power": {
                "capacity_wh": self.power.capacity_wh,
                "charger_w": self.power.charger_w,
                "budget_w": self.power.budget_w,
            },
            "base_loads": dict(self.base_loads),
            "base_station": list(self.base_station),
            "rates": {
                "telemetry": self.rates.telemetry,
                "master": self.rates.master,
                "sonar": self.rates.sonar,
                "gnss": self.rates.gnss,
            },
            "scripted_commands": [{"t": c.t, "command": dict(c.body)}
                                  for c in self.scripted_commands],
        }


def scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    """Build a Scenario from plain data, collecting all validation errors."""
    if not isinstance(data, Mapping):
        raise ScenarioError(["$: scenario must be a mapping"])
    chk = _Check()

    name = data.get("name", "unnamed")
    if not isinstance(name, str):
        chk.error("name", "must be a string")
        name = "unnamed"
    duration = chk.num(data, "duration", "", 60.0, positive=True)
    dt = chk.num(data, "dt", "", 0.01, positive=True)
    if dt > 0.1:
        chk.error("dt", "must be <= 0.1")
    seed = chk.integer(data, "seed", "", 0, minimum=0)

    init = chk.section(data, "initial", "")
    mode_sec = chk.section(init, "mode", "initial")
    try:
        initial_mode = ModeState(
            op=OpMode(chk.choice(mode_sec, "op", "initial.mode", "EXP",
                                 ("EXP", "INT"))),
            nav=NavMode(chk.choice(mode_sec, "nav", "initial.mode", "AUTNAV",
                                   ("AUTNAV", "MANCON", "SAUTPOS"))),
            link=LinkMode(chk.choice(mode_sec, "link", "initial.mode", "TET",
                                     ("TET", "NOWIRE"))))
    except ValueError:
        initial_mode = ModeState()
    if not initial_mode.is_valid():
        chk.error("initial.mode", "MANCON/SAUTPOS requires op INT")
        initial_mode = ModeState()
    initial_state = VehicleState(
        x=chk.num(init, "x", "initial", 0.0),
        y=chk.num(init, "y", "initial", 0.0),
        z=chk.num(init, "z", "initial", 0.0, nonnegative=True),
        psi=chk.num(init, "psi", "initial", 0.0))

    veh = chk.section(data, "vehicle", "")
    defaults = VehicleParams()
    added = veh.get("added_mass", list(defaults.added_mass))
    drag_l = veh.get("drag_linear", list(defaults.drag_linear))
    drag_q = veh.get("drag_quadratic", list(defaults.drag_quadratic))
    for key, vec in (("added_mass", added), ("drag_linear", drag_l),
                     ("drag_quadratic", drag_q)):
        if (not isinstance(vec, (list, tuple)) or len(vec) != 4
                or any(isinstance(x, bool) or not isinstance(x, (int, float))
                       or x < 0 for x in vec)):
            chk.error(f"vehicle.{key}", "must be 4 numbers >= 0")
    current = veh.get("current", [0.0, 0.0])
    if (not isinstance(current, (list, tuple)) or len(current) != 2
            or any(not isinstance(x, (int, float)) for x in current)):
        chk.error("vehicle.current", "must be 2 numbers")
        current = [0.0, 0.0]
    try:
        vehicle = VehicleParams(
            mass=chk.num(veh, "mass", "vehicle", defaults.mass,
                         positive=True),
            added_mass=tuple(float(x) for x in added),
            drag_linear=tuple(float(x) for x in drag_l),
            drag_quadratic=tuple(float(x) for x in drag_q),
            length=chk.num(veh, "length", "vehicle", defaults.length,
                           positive=True),
            max_depth=chk.num(veh, "max_depth", "vehicle",
                              defaults.max_depth, positive=True),
            current=(float(current[0]), float(current[1])))
        vehicle.validate()
    except (TypeError, ValueError):
        vehicle = defaults

    fin_sec = chk.section(data, "fins", "")
    fin_defaults = FinParams()
    mounts = fin_sec.get("mounts")
    if mounts is not None:
        if (not isinstance(mounts, Mapping) or len(mounts) < 4
                or any(not isinstance(v, (list, tuple)) or len(v) != 2
                       for v in mounts.values())):
            chk.error("fins.mounts", "must map >= 4 fin ids to [x, y]")
            mounts = None
    try:
        fins = FinParams(
            thrust_coeff=chk.num(fin_sec, "thrust_coeff", "fins",
                                 fin_defaults.thrust_coeff, positive=True),
            tw_efficiency=chk.num(fin_sec, "tw_efficiency", "fins",
                                  fin_defaults.tw_efficiency, positive=True),
            amplitude_max=chk.num(fin_sec, "amplitude_max", "fins",
                                  fin_defaults.amplitude_max, positive=True),
            frequency_max=chk.num(fin_sec, "frequency_max", "fins",
                                  fin_defaults.frequency_max, positive=True),
            mounts=({k: (float(v[0]), float(v[1]))
                     for k, v in mounts.items()} if mounts else None))
        fins.validate()
    except (TypeError, ValueError) as err:
        chk.error("fins", str(err))
        fins = fin_defaults

    jet_sec = chk.section(data, "jet", "")
    jet_defaults = JetParams()
    jet = JetParams(
        capacity=chk.num(jet_sec, "capacity", "jet", jet_defaults.capacity,
                         positive=True),
        elastic_coeff=chk.num(jet_sec, "elastic_coeff", "jet",
                              jet_defaults.elastic_coeff, positive=True),
        discharge_coeff=chk.num(jet_sec, "discharge_coeff", "jet",
                                jet_defaults.discharge_coeff, positive=True),
        thrust_coeff=chk.num(jet_sec, "thrust_coeff", "jet",
                             jet_defaults.thrust_coeff, positive=True),
        pump_max=chk.num(jet_sec, "pump_max", "jet", jet_defaults.pump_max,
                         nonnegative=True))

    limb_sec = chk.section(data, "limb", "")
    geom_defaults = LimbGeometry()
    limb_geometry = LimbGeometry(
        length=chk.num(limb_sec, "length", "limb", geom_defaults.length,
                       positive=True),
        base_radius=chk.num(limb_sec, "base_radius", "limb",
                            geom_defaults.base_radius, positive=True),
        tip_radius=chk.num(limb_sec, "tip_radius", "limb",
                           geom_defaults.tip_radius, positive=True),
        n_segments=chk.integer(limb_sec, "n_segments", "limb",
                               geom_defaults.n_segments, minimum=1))
    try:
        limb_geometry.validate()
    except ValueError as err:
        chk.error("limb", str(err))
        limb_geometry = geom_defaults
    mounts_raw = limb_sec.get("mounts", [[0.55, 0.0, 0.0]])
    limb_mounts = []
    if not isinstance(mounts_raw, list) or not mounts_raw:
        chk.error("limb.mounts", "must be a non-empty list of [x, y, z]")
        mounts_raw = [[0.55, 0.0, 0.0]]
    for i, m in enumerate(mounts_raw):
        if (not isinstance(m, (list, tuple)) or len(m) != 3
                or any(not isinstance(x, (int, float)) for x in m)):
            chk.error(f"limb.mounts[{i}]", "must be [x, y, z]")
            m = [0.55, 0.0, 0.0]
        limb_mounts.append(LimbMount(position=tuple(float(x) for x in m)))
    initial_limb_config = None
    if "initial_kappa" in limb_sec and limb_sec["initial_kappa"] is not None:
        kappa = limb_sec["initial_kappa"]
        phi = limb_sec.get("initial_phi") or [0.0] * len(kappa)
        if (not isinstance(kappa, list)
                or len(kappa) != limb_geometry.n_segments):
            chk.error("limb.initial_kappa",
                      f"must list {limb_geometry.n_segments} curvatures")
        elif not isinstance(phi, list) or len(phi) != len(kappa):
            chk.error("limb.initial_phi", "must match initial_kappa length")
        else:
            initial_limb_config = LimbConfig(
                kappa=tuple(float(k) for k in kappa),
                phi=tuple(float(p) for p in phi))

    lms = data.get("landmarks", [])
    landmark_list = []
    if not isinstance(lms, list):
        chk.error("landmarks", "must be a list")
        lms = []
    for i, lm in enumerate(lms):
        if (not isinstance(lm, Mapping) or "id" not in lm
                or "x" not in lm or "y" not in lm):
            chk.error(f"landmarks[{i}]", "must have id, x, y")
            continue
        landmark_list.append(Landmark(id=int(lm["id"]), x=float(lm["x"]),
                                      y=float(lm["y"])))
    try:
        landmarks = LandmarkMap(landmarks=tuple(landmark_list))
    except ValueError as err:
        chk.error("landmarks", str(err))
        landmarks = LandmarkMap(landmarks=())

    noise_sec = chk.section(data, "noise", "")
    noise_defaults = NoiseConfig()
    noise = NoiseConfig(
        dvl_sigma=chk.num(noise_sec, "dvl_sigma", "noise",
                          noise_defaults.dvl_sigma, nonnegative=True),
        imu_sigma=chk.num(noise_sec, "imu_sigma", "noise",
                          noise_defaults.imu_sigma, nonnegative=True),
        depth_sigma=chk.num(noise_sec, "depth_sigma", "noise",
                            noise_defaults.depth_sigma, nonnegative=True),
        gnss_sigma=chk.num(noise_sec, "gnss_sigma", "noise",
                           noise_defaults.gnss_sigma, nonnegative=True),
        sonar_range_sigma=chk.num(noise_sec, "sonar_range_sigma", "noise",
                                  noise_defaults.sonar_range_sigma,
                                  nonnegative=True),
        sonar_bearing_sigma=chk.num(noise_sec, "sonar_bearing_sigma",
                                    "noise",
                                    noise_defaults.sonar_bearing_sigma,
                                    nonnegative=True),
        sonar_max_range=chk.num(noise_sec, "sonar_max_range", "noise",
                                noise_defaults.sonar_max_range,
                                positive=True))

    plan = None
    plan_sec = data.get("plan")
    if plan_sec is not None:
        if not isinstance(plan_sec, Mapping):
            chk.error("plan", "must be a mapping")
        else:
            wps = plan_sec.get("waypoints", [])
            if (not isinstance(wps, list) or not wps
                    or any(not isinstance(wp, (list, tuple)) or len(wp) != 2
                           for wp in wps)):
                chk.error("plan.waypoints",
                          "must be a non-empty list of [x, y]")
            else:
                plan = WaypointPlan(
                    waypoints=tuple((float(wp[0]), float(wp[1]))
                                    for wp in wps),
                    acceptance_radius=chk.num(plan_sec, "acceptance_radius",
                                              "plan", 1.0, positive=True),
                    cruise_speed=chk.num(plan_sec, "cruise_speed", "plan",
                                         0.8, positive=True))

    los_sec = chk.section(data, "los", "")
    los = LosParams(
        lookahead=chk.num(los_sec, "lookahead", "los", 2.4, positive=True),
        gamma=chk.num(los_sec, "gamma", "los", 0.05, nonnegative=True))

    sched_raw = data.get("depth_schedule", [])
    depth_schedule = []
    if not isinstance(sched_raw, list):
        chk.error("depth_schedule", "must be a list of [t, depth]")
        sched_raw = []
    last_t = -math.inf
    for i, entry in enumerate(sched_raw):
        if (not isinstance(entry, (list, tuple)) or len(entry) != 2
                or any(not isinstance(x, (int, float)) for x in entry)):
            chk.error(f"depth_schedule[{i}]", "must be [t, depth]")
            continue
        t_entry, depth_entry = float(entry[0]), float(entry[1])
        if depth_entry < 0:
            chk.error(f"depth_schedule[{i}]", "depth must be >= 0")
        if t_entry <= last_t:
            chk.error(f"depth_schedule[{i}]",
                      "times must be strictly increasing")
        last_t = t_entry
        depth_schedule.append((t_entry, depth_entry))

    env = chk.section(data, "environment", "")
    planes_raw = env.get("contact_planes", [])
    contact_planes = []
    if not isinstance(planes_raw, list):
        chk.error("environment.contact_planes", "must be a list")
        planes_raw = []
    for i, plane in enumerate(planes_raw):
        path = f"environment.contact_planes[{i}]"
        if not isinstance(plane, Mapping):
            chk.error(path, "must be a mapping")
            continue
        try:
            patch = PlanePatch(
                normal=tuple(float(x) for x in plane["normal"]),
                offset=float(plane["offset"]),
                center=tuple(float(x) for x in plane["center"]),
                half_extents=tuple(float(x) for x in
                                   plane.get("half_extents", (0.5, 0.5))))
        except (KeyError, TypeError, ValueError) as err:
            chk.error(path, f"invalid plane: {err}")
            continue
        frame = plane.get("frame", "world")
        if frame not in ("world", "limb"):
            chk.error(f"{path}.frame", "must be 'world' or 'limb'")
            frame = "world"
        contact_planes.append(ScenarioPlane(
            patch=patch, frame=frame,
            limb_index=int(plane.get("limb_index", 0))))
    contact_stiffness = chk.num(env, "contact_stiffness", "environment",
                                500.0, positive=True)
    proxy_damping = chk.num(env, "proxy_damping", "environment", 50.0,
                            nonnegative=True)
    clusters_raw = env.get("depth_sample_clusters", [])
    clusters = []
    if not isinstance(clusters_raw, list):
        chk.error("environment.depth_sample_clusters", "must be a list")
        clusters_raw = []
    for i, cluster in enumerate(clusters_raw):
        path = f"environment.depth_sample_clusters[{i}]"
        if (not isinstance(cluster, list)
                or any(not isinstance(pt, (list, tuple)) or len(pt) != 3
                       for pt in cluster)):
            chk.error(path, "must be a list of [x, y, z] points")
            continue
        clusters.append(tuple(tuple(float(x) for x in pt)
                              for pt in cluster))

    power_sec = chk.section(data, "power", "")
    power_defaults = PowerParams()
    power = PowerParams(
        capacity_wh=chk.num(power_sec, "capacity_wh", "power",
                            power_defaults.capacity_wh, positive=True),
        charger_w=chk.num(power_sec, "charger_w", "power",
                          power_defaults.charger_w, nonnegative=True),
        budget_w=chk.num(power_sec, "budget_w", "power",
                         power_defaults.budget_w, positive=True))

    loads_sec = chk.section(data, "base_loads", "")
    base_loads = {"computers": 40.0, "comms": 15.0, "payload": 20.0}
    for key, value in loads_sec.items():
        if key not in ("propulsion", "limbs", "computers", "comms",
                       "payload"):
            chk.error(f"base_loads.{key}", "unknown subsystem")
            continue
        if not isinstance(value, (int, float)) or value < 0:
            chk.error(f"base_loads.{key}", "must be a number >= 0")
            continue
        base_loads[key] = float(value)

    station = data.get("base_station", [0.0, 0.0])
    if (not isinstance(station, (list, tuple)) or len(station) != 2
            or any(not isinstance(x, (int, float)) for x in station)):
        chk.error("base_station", "must be [x, y]")
        station = [0.0, 0.0]

    rates_sec = chk.section(data, "rates", "")
    rates = RateDividers(
        telemetry=chk.integer(rates_sec, "telemetry", "rates", 10, minimum=1),
        master=chk.integer(rates_sec, "master", "rates", 2, minimum=1),
        sonar=chk.integer(rates_sec, "sonar", "rates", 50, minimum=1),
        gnss=chk.integer(rates_sec, "gnss", "rates", 100, minimum=1))

    scripted_raw = data.get("scripted_commands", [])
    scripted = []
    if not isinstance(scripted_raw, list):
        chk.error("scripted_commands", "must be a list")
        scripted_raw = []
    for i, entry in enumerate(scripted_raw):
        path = f"scripted_commands[{i}]"
        if (not isinstance(entry, Mapping) or "t" not in entry
                or "command" not in entry
                or not isinstance(entry["command"], Mapping)):
            chk.error(path, "must have numeric t and a command mapping")
            continue
        if not isinstance(entry["t"], (int, float)) or entry["t"] < 0:
            chk.error(f"{path}.t", "must be a number >= 0")
            continue
        scripted.append(ScriptedCommand(t=float(entry["t"]),
                                        body=dict(entry["command"])))
    scripted.sort(key=lambda c: c.t)

    if chk.errors:
        raise ScenarioError(chk.errors)
    return Scenario(
        name=name, duration=duration, dt=dt, seed=seed,
        initial_state=initial_state, initial_mode=initial_mode,
        vehicle=vehicle, fins=fins, jet=jet, limb_geometry=limb_geometry,
        limb_mounts=tuple(limb_mounts),
        initial_limb_config=initial_limb_config, landmarks=landmarks,
        noise=noise, plan=plan, los=los,
        depth_schedule=tuple(depth_schedule),
        contact_planes=tuple(contact_planes),
        contact_stiffness=contact_stiffness, proxy_damping=proxy_damping,
        depth_sample_clusters=tuple(clusters), power=power,
        base_loads=base_loads,
        base_station=(float(station[0]), float(station[1])), rates=rates,
        scripted_commands=tuple(scripted))


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario YAML file."""
    raw = Path(path).read_text()
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as err:
        raise ScenarioError([f"$: not valid YAML: {err}"]) from None
    if data is None:
        data = {}
    return scenario_from_dict(data)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario.to_dict(),
                                         sort_keys=False))


def demo_mission(seed: int = 42) -> Scenario:
    """The scripted reference mission.

    Surface GNSS fix, dive to 3 m, a five-waypoint transit with landmark
    updates, switch to INT/MANCON over the tether, teleoperate the bow limb
    into a contact plate carried ahead of the head (the proxy starts a few
    millimeters off so the first touch forces a reconciliation), then
    surface.  One deliberately illegal limb command during the EXP phase
    exercises the mode-legality rejection path.
    """
    geometry = LimbGeometry()
    initial_config = LimbConfig(kappa=(1.2,) * geometry.n_segments,
                                phi=(0.0,) * geometry.n_segments)
    tip = forward_kinematics(initial_config, geometry).position
    # Contact plate 50 mm below the initial tip, face up: the free side is
    # the approach side, matching the fitted-patch orientation convention.
    plate_z = float(tip[2]) - 0.05
    plate_center = (float(tip[0]), 0.0, plate_z)
    plane = ScenarioPlane(
        patch=PlanePatch(normal=(0.0, 0.0, 1.0), offset=plate_z,
                         center=plate_center, half_extents=(0.4, 0.4)),
        frame="limb", limb_index=0)
    # The proxy's depth samples sit 3 mm past the true plate, so the first
    # measured contact arrives while the proxy still reads free -- the
    # reconciler translates the patch onto the real surface.
    sample_z = plate_z - 0.003
    cluster = tuple(
        (plate_center[0] + dx, dy, sample_z)
        for dx, dy in ((0.05, 0.05), (0.05, -0.05), (-0.05, 0.05),
                       (-0.05, -0.05), (0.0, 0.0)))

    waypoints = [(15.0, 0.0), (30.0, 8.0), (45.0, 0.0), (60.0, -8.0),
                 (75.0, 0.0)]
    landmarks = [
        {"id": 1, "x": 10.0, "y": 6.0}, {"id": 2, "x": 25.0, "y": -5.0},
        {"id": 3, "x": 40.0, "y": 8.0}, {"id": 4, "x": 55.0, "y": -6.0},
        {"id": 5, "x": 70.0, "y": 5.0}, {"id": 6, "x": 80.0, "y": -3.0},
    ]

    commands: list[dict] = []
    # Illegal during EXP: exercises the rejection path end to end.
    commands.append({"t": 5.0, "command": {
        "kind": "limb_master", "id": "early-limb", "limb": 0,
        "increment": [0.0, 0.0, 0.001], "clutch": True}})
    commands.append({"t": 150.0, "command": {
        "kind": "mode_transition", "id": "go-intervention",
        "target": {"op": "INT", "nav": "MANCON", "link": "TET"}}})
    # Press the tip down 2.5 mm per master step: ~20 steps of free travel,
    # then ~20 mm of commanded penetration into the plate.
    step_count, push = 28, -0.0025
    for i in range(step_count):
        commands.append({"t": 155.0 + 0.1 * i, "command": {
            "kind": "limb_master", "id": f"push-{i:03d}", "limb": 0,
            "increment": [0.0, 0.0, push], "clutch": True}})
    commands.append({"t": 165.0, "command": {
        "kind": "mode_transition", "id": "back-to-autnav",
        "target": {"op": "INT", "nav": "AUTNAV", "link": "TET"}}})

    return scenario_from_dict({
        "name": "demo-mission",
        "duration": 230.0,
        "dt": 0.01,
        "seed": seed,
        "initial": {"x": 0.0, "y": 0.0, "z": 0.0, "psi": 0.0,
                    "mode": {"op": "EXP", "nav": "AUTNAV", "link": "TET"}},
        "landmarks": landmarks,
        "plan": {"waypoints": [list(wp) for wp in waypoints],
                 "acceptance_radius": 1.5, "cruise_speed": 0.9},
        "los": {"lookahead": 2.4, "gamma": 0.05},
        "depth_schedule": [[10.0, 3.0], [170.0, 0.0]],
        "limb": {
            "mounts": [[0.55, 0.0, 0.0]],
            "initial_kappa": list(initial_config.kappa),
            "initial_phi": list(initial_config.phi),
        },
        "environment": {
            "contact_planes": [{
                "normal": list(plane.patch.normal),
                "offset": plane.patch.offset,
                "center": list(plane.patch.center),
                "half_extents": list(plane.patch.half_extents),
                "frame": "limb", "limb_index": 0,
            }],
            "contact_stiffness": 500.0,
            "depth_sample_clusters": [[list(pt) for pt in cluster]],
        },
        "scripted_commands": commands,
    })
