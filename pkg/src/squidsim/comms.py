"""Wire protocol, link models and the deterministic transport session.

Messages travel as canonical JSON (sorted keys, no whitespace, UTF-8) inside
the envelope {"v": 1, "type": ..., "seq": ..., "t": ..., "body": ...}.
Decoding is total: arbitrary bytes either yield a validated message or raise
SchemaError naming the offending field path -- never anything else.

Three link models: the umbilical (always available, 100 Mbit/s class, 1 ms),
an optical link (range- and alignment-limited, bandwidth degrading linearly
with range) and surface LTE/WiFi (available only near the surface).  The
session layer applies the link latency as a delay queue and the bandwidth
as a token bucket; telemetry overflow drops the oldest frames, commands are
never dropped (only delayed, delivered exactly once in order), and an
emergency stop bypasses the queues entirely.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .modes import ModeState, NavMode, OpMode, teleop_allowed

PROTOCOL_VERSION = 1
ENVELOPE_KEYS = {"v", "type", "seq", "t", "body"}
MESSAGE_TYPES = ("telemetry", "command", "ack")


class SchemaError(ValueError):
    """Validation failure carrying the path of the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class CommandKind(str, enum.Enum):
    MODE_TRANSITION = "mode_transition"
    WAYPOINT_UPLOAD = "waypoint_upload"
    FIN_OVERRIDE = "fin_override"
    LIMB_MASTER = "limb_master"
    JET_FIRE = "jet_fire"
    EMERGENCY_STOP = "emergency_stop"


def encode_message(message: Mapping[str, Any]) -> bytes:
    """Serialize a validated message to canonical bytes.

    Canonical form: JSON with sorted keys, compact separators, no NaN/Inf.
    The same message always encodes to the same bytes.
    """
    validated = validate_message(message)
    return json.dumps(validated, sort_keys=True,
                      separators=(",", ":"), allow_nan=False).encode("utf-8")


def decode_message(data: bytes) -> dict:
    """Parse and validate bytes into a message dict.

    Total over arbitrary input: anything that is not a valid message raises
    SchemaError (with the field path); no other exception escapes.
    """
    if not isinstance(data, (bytes, bytearray)):
        raise SchemaError("$", "input must be bytes")
    try:
        text = bytes(data).decode("utf-8")
    except UnicodeDecodeError:
        raise SchemaError("$", "input is not valid UTF-8") from None
    try:
        raw = json.loads(text)
    except (json.JSONDecodeError, RecursionError, ValueError):
        raise SchemaError("$", "input is not valid JSON") from None
    return validate_message(raw)


def _expect_dict(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(path, "must be an object")
    return value


def _expect_keys(obj: dict, path: str, required: Sequence[str],
                 optional: Sequence[str] = ()) -> None:
    for key in required:
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing required field")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}", "unknown field")


def _expect_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, "must be a number")
    if not math.isfinite(value):
        raise SchemaError(path, "must be finite")
    return float(value)


def _expect_int(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, "must be an integer")
    if minimum is not None and value < minimum:
        raise SchemaError(path, f"must be >= {minimum}")
    return value


def _expect_str(value: Any, path: str, choices: Sequence[str] | None = None
                ) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, "must be a string")
    if choices is not None and value not in choices:
        raise SchemaError(path, f"must be one of {sorted(choices)}")
    return value


def _expect_bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise SchemaError(path, "must be a boolean")
    return value


def _expect_vector(value: Any, path: str, length: int) -> list[float]:
    if not isinstance(value, list) or len(value) != length:
        raise SchemaError(path, f"must be a list of {length} numbers")
    return [_expect_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def validate_message(raw: Any) -> dict:
    """Validate an arbitrary decoded object against the message schemas."""
    obj = _expect_dict(raw, "$")
    _expect_keys(obj, "$", ["v", "type", "seq", "t", "body"])
    version = _expect_int(obj["v"], "$.v")
    if version != PROTOCOL_VERSION:
        raise SchemaError("$.v", f"unsupported protocol version {version}")
    msg_type = _expect_str(obj["type"], "$.type", MESSAGE_TYPES)
    seq = _expect_int(obj["seq"], "$.seq", minimum=0)
    t = _expect_number(obj["t"], "$.t")
    body = _expect_dict(obj["body"], "$.body")
    if msg_type == "telemetry":
        body = _validate_telemetry(body)
    elif msg_type == "command":
        body = _validate_command(body)
    else:
        body = _validate_ack(body)
    return {"v": version, "type": msg_type, "seq": seq, "t": t, "body": body}


_MODE_FIELDS = {"op": ("EXP", "INT"),
                "nav": ("AUTNAV", "MANCON", "SAUTPOS"),
                "link": ("TET", "NOWIRE")}


def _validate_mode(body: Any, path: str) -> dict:
    obj = _expect_dict(body, path)
    _expect_keys(obj, path, ["op", "nav", "link"])
    return {key: _expect_str(obj[key], f"{path}.{key}", choices)
            for key, choices in _MODE_FIELDS.items()}


def _validate_telemetry(body: dict) -> dict:
    path = "$.body"
    _expect_keys(obj=body, path=path,
                 required=["vehicle", "nav", "mode", "limbs", "power",
                           "link", "faults", "guidance"])
    vehicle = _expect_dict(body["vehicle"], f"{path}.vehicle")
    _expect_keys(vehicle, f"{path}.vehicle",
                 ["x", "y", "z", "psi", "u", "v", "r", "w"])
    vehicle = {k: _expect_number(v, f"{path}.vehicle.{k}")
               for k, v in vehicle.items()}

    nav = _expect_dict(body["nav"], f"{path}.nav")
    _expect_keys(nav, f"{path}.nav", ["x", "y", "psi", "cov"])
    nav_out = {k: _expect_number(nav[k], f"{path}.nav.{k}")
               for k in ("x", "y", "psi")}
    nav_out["cov"] = _expect_vector(nav["cov"], f"{path}.nav.cov", 9)

    mode = _validate_mode(body["mode"], f"{path}.mode")

    if not isinstance(body["limbs"], list):
        raise SchemaError(f"{path}.limbs", "must be a list")
    limbs = []
    for i, limb in enumerate(body["limbs"]):
        lpath = f"{path}.limbs[{i}]"
        lobj = _expect_dict(limb, lpath)
        _expect_keys(lobj, lpath, ["id", "tip", "direction", "tendon_dl"])
        limbs.append({
            "id": _expect_str(lobj["id"], f"{lpath}.id"),
            "tip": _expect_vector(lobj["tip"], f"{lpath}.tip", 3),
            "direction": _expect_vector(lobj["direction"],
                                        f"{lpath}.direction", 3),
            "tendon_dl": _expect_vector(lobj["tendon_dl"],
                                        f"{lpath}.tendon_dl", 4),
        })

    power = _expect_dict(body["power"], f"{path}.power")
    _expect_keys(power, f"{path}.power",
                 ["source", "soc_wh", "bus_v", "total_w", "mean_w",
                  "endurance_h"])
    power_out = {
        "source": _expect_str(power["source"], f"{path}.power.source",
                              ("battery", "umbilical")),
        "soc_wh": _expect_number(power["soc_wh"], f"{path}.power.soc_wh"),
        "bus_v": _expect_number(power["bus_v"], f"{path}.power.bus_v"),
        "total_w": _expect_number(power["total_w"], f"{path}.power.total_w"),
        "mean_w": _expect_number(power["mean_w"], f"{path}.power.mean_w"),
        "endurance_h": (None if power["endurance_h"] is None else
                        _expect_number(power["endurance_h"],
                                       f"{path}.power.endurance_h")),
    }

    link = _expect_dict(body["link"], f"{path}.link")
    _expect_keys(link, f"{path}.link",
                 ["kind", "available", "bandwidth_kbps", "latency_ms"])
    link_out = {
        "kind": _expect_str(link["kind"], f"{path}.link.kind",
                            ("umbilical", "vlc", "lte_wifi")),
        "available": _expect_bool(link["available"],
                                  f"{path}.link.available"),
        "bandwidth_kbps": _expect_number(link["bandwidth_kbps"],
                                         f"{path}.link.bandwidth_kbps"),
        "latency_ms": _expect_number(link["latency_ms"],
                                     f"{path}.link.latency_ms"),
    }

    if not isinstance(body["faults"], list):
        raise SchemaError(f"{path}.faults", "must be a list")
    faults = [_expect_str(f, f"{path}.faults[{i}]")
              for i, f in enumerate(body["faults"])]

    guidance = _expect_dict(body["guidance"], f"{path}.guidance")
    _expect_keys(guidance, f"{path}.guidance",
                 ["active_waypoint", "cross_track_error", "done"])
    guidance_out = {
        "active_waypoint": _expect_int(guidance["active_waypoint"],
                                       f"{path}.guidance.active_waypoint",
                                       minimum=0),
        "cross_track_error": _expect_number(
            guidance["cross_track_error"],
            f"{path}.guidance.cross_track_error"),
        "done": _expect_bool(guidance["done"], f"{path}.guidance.done"),
    }

    return {"vehicle": vehicle, "nav": nav_out, "mode": mode, "limbs": limbs,
            "power": power_out, "link": link_out, "faults": faults,
            "guidance": guidance_out}


def _validate_command(body: dict) -> dict:
    path = "$.body"
    obj = _expect_dict(body, path)
    if "kind" not in obj:
        raise SchemaError(f"{path}.kind", "missing required field")
    kind = _expect_str(obj["kind"], f"{path}.kind",
                       [k.value for k in CommandKind])
    if "id" not in obj:
        raise SchemaError(f"{path}.id", "missing required field")
    cmd_id = _expect_str(obj["id"], f"{path}.id")

    if kind == CommandKind.MODE_TRANSITION.value:
        _expect_keys(obj, path, ["kind", "id", "target"])
        return {"kind": kind, "id": cmd_id,
                "target": _validate_mode(obj["target"], f"{path}.target")}
    if kind == CommandKind.WAYPOINT_UPLOAD.value:
        _expect_keys(obj, path, ["kind", "id", "waypoints"],
                     optional=["acceptance_radius", "cruise_speed"])
        if not isinstance(obj["waypoints"], list) or not obj["waypoints"]:
            raise SchemaError(f"{path}.waypoints",
                              "must be a non-empty list")
        waypoints = [_expect_vector(wp, f"{path}.waypoints[{i}]", 2)
                     for i, wp in enumerate(obj["waypoints"])]
        out = {"kind": kind, "id": cmd_id, "waypoints": waypoints}
        for key in ("acceptance_radius", "cruise_speed"):
            if key in obj:
                value = _expect_number(obj[key], f"{path}.{key}")
                if value <= 0.0:
                    raise SchemaError(f"{path}.{key}", "must be > 0")
                out[key] = value
        return out
    if kind == CommandKind.FIN_OVERRIDE.value:
        _expect_keys(obj, path, ["kind", "id", "fins"])
        if not isinstance(obj["fins"], list):
            raise SchemaError(f"{path}.fins", "must be a list")
        fins = []
        for i, fin in enumerate(obj["fins"]):
            fpath = f"{path}.fins[{i}]"
            fobj = _expect_dict(fin, fpath)
            _expect_keys(fobj, fpath,
                         ["id", "swivel", "mode", "amplitude", "frequency"],
                         optional=["phase"])
            fins.append({
                "id": _expect_str(fobj["id"], f"{fpath}.id"),
                "swivel": _expect_number(fobj["swivel"], f"{fpath}.swivel"),
                "mode": _expect_str(fobj["mode"], f"{fpath}.mode",
                                    ("SW", "TW")),
                "amplitude": _expect_number(fobj["amplitude"],
                                            f"{fpath}.amplitude"),
                "frequency": _expect_number(fobj["frequency"],
                                            f"{fpath}.frequency"),
                "phase": _expect_number(fobj.get("phase", 0.0),
                                        f"{fpath}.phase"),
            })
        return {"kind": kind, "id": cmd_id, "fins": fins}
    if kind == CommandKind.LIMB_MASTER.value:
        _expect_keys(obj, path, ["kind", "id", "limb", "increment",
                                 "clutch"], optional=["scale"])
        return {
            "kind": kind, "id": cmd_id,
            "limb": _expect_int(obj["limb"], f"{path}.limb", minimum=0),
            "increment": _expect_vector(obj["increment"],
                                        f"{path}.increment", 3),
            "clutch": _expect_bool(obj["clutch"], f"{path}.clutch"),
            "scale": _expect_number(obj.get("scale", 1.0), f"{path}.scale"),
        }
    if kind == CommandKind.JET_FIRE.value:
        _expect_keys(obj, path, ["kind", "id", "pump_rate", "valve_open",
                                 "nozzle_angle"])
        return {
            "kind": kind, "id": cmd_id,
            "pump_rate": _expect_number(obj["pump_rate"],
                                        f"{path}.pump_rate"),
            "valve_open": _expect_bool(obj["valve_open"],
                                       f"{path}.valve_open"),
            "nozzle_angle": _expect_number(obj["nozzle_angle"],
                                           f"{path}.nozzle_angle"),
        }
    # emergency_stop
    _expect_keys(obj, path, ["kind", "id"])
    return {"kind": kind, "id": cmd_id}


def _validate_ack(body: dict) -> dict:
    path = "$.body"
    _expect_keys(body, path, ["command_id", "status"], optional=["reason"])
    status = _expect_str(body["status"], f"{path}.status",
                         ("accepted", "rejected"))
    out = {"command_id": _expect_str(body["command_id"],
                                     f"{path}.command_id"),
           "status": status}
    if "reason" in body:
        out["reason"] = _expect_str(body["reason"], f"{path}.reason")
    elif status == "rejected":
        raise SchemaError(f"{path}.reason",
                          "missing required field for rejected status")
    return out


def make_message(msg_type: str, seq: int, t: float,
                 body: Mapping[str, Any]) -> dict:
    return validate_message({"v": PROTOCOL_VERSION, "type": msg_type,
                             "seq": seq, "t": t, "body": dict(body)})


class LinkKind(str, enum.Enum):
    UMBILICAL = "umbilical"
    VLC = "vlc"
    LTE_WIFI = "lte_wifi"


@dataclass(frozen=True)
class LinkModel:
    """Static description of one physical link option."""

    kind: LinkKind
    bandwidth_kbps: float = 100_000.0
    latency_s: float = 0.001
    max_range_m: float = 20.0
    max_alignment_deg: float = 60.0
    surface_depth_m: float = 0.3
    min_bandwidth_kbps: float = 100.0


DEFAULT_LINKS = {
    LinkKind.UMBILICAL: LinkModel(kind=LinkKind.UMBILICAL,
                                  bandwidth_kbps=100_000.0, latency_s=0.001),
    LinkKind.VLC: LinkModel(kind=LinkKind.VLC, bandwidth_kbps=10_000.0,
                            latency_s=0.005),
    LinkKind.LTE_WIFI: LinkModel(kind=LinkKind.LTE_WIFI,
                                 bandwidth_kbps=10_000.0, latency_s=0.05),
}


@dataclass(frozen=True)
class LinkStatus:
    kind: LinkKind
    available: bool
    bandwidth_kbps: float
    latency_s: float


def link_available(model: LinkModel, depth: float = 0.0,
                   range_m: float = 0.0,
                   alignment_deg: float = 0.0) -> LinkStatus:
    """Evaluate link availability and quality for the current geometry.

    The umbilical is always available.  The optical link requires range and
    alignment within limits, with bandwidth degrading linearly in range
    (floored above zero while available).  LTE/WiFi requires the vehicle at
    the surface.
    """
    if model.kind is LinkKind.UMBILICAL:
        return LinkStatus(kind=model.kind, available=True,
                          bandwidth_kbps=model.bandwidth_kbps,
                          latency_s=model.latency_s)
    if model.kind is LinkKind.VLC:
        ok = (range_m <= model.max_range_m
              and abs(alignment_deg) <= model.max_alignment_deg)
        bandwidth = 0.0
        if ok:
            fraction = 1.0 - range_m / model.max_range_m
            bandwidth = max(model.min_bandwidth_kbps,
                            model.bandwidth_kbps * fraction)
        return LinkStatus(kind=model.kind, available=ok,
                          bandwidth_kbps=bandwidth, latency_s=model.latency_s)
    ok = depth < model.surface_depth_m
    return LinkStatus(kind=model.kind, available=ok,
                      bandwidth_kbps=model.bandwidth_kbps if ok else 0.0,
                      latency_s=model.latency_s)


def validate_command_for_mode(command: Mapping[str, Any],
                              mode: ModeState) -> str | None:
    """Reason string when a command is illegal in the current mode, else None.

    Limb master commands require a teleoperation mode (INT + MANCON or
    SAUTPOS); fin overrides and jet firing require INT + MANCON.  Mode
    transitions, waypoint uploads and the emergency stop are always
    deliverable (transitions are judged by the mode machine itself).
    """
    kind = command.get("kind")
    if kind == CommandKind.LIMB_MASTER.value and not teleop_allowed(mode):
        return ("limb-master-requires-teleop-mode: current mode is "
                + mode.describe())
    if kind in (CommandKind.FIN_OVERRIDE.value, CommandKind.JET_FIRE.value):
        if not (mode.op is OpMode.INT and mode.nav is NavMode.MANCON):
            return ("manual-actuation-requires-int-mancon: current mode is "
                    + mode.describe())
    return None


@dataclass
class _Queued:
    message: dict
    data: bytes
    eligible_t: float

    @property
    def size_bits(self) -> int:
        return 8 * len(self.data)


@dataclass
class SessionStepResult:
    delivered_commands: list[dict]
    transmitted_frames: list[bytes]
    rejections: list[dict]
    dropped_frames: int


class Session:
    """One operator connection: delay queues, token buckets, sequencing.

    Per direction the link latency is a delay queue (messages become
    eligible latency seconds after submission) and the bandwidth is a token
    bucket in bits.  Command delivery is exactly-once, in order, never
    dropped; the telemetry queue drops its oldest frames beyond
    ``frame_buffer``.  An emergency stop is delivered the tick it arrives,
    bypassing latency, tokens and availability.
    """

    def __init__(self, session_id: str = "operator",
                 frame_buffer: int = 8, bucket_depth_s: float = 0.25):
        self.session_id = session_id
        self.time = 0.0
        self.frame_buffer = frame_buffer
        self.bucket_depth_s = bucket_depth_s
        self.up_tokens = 0.0
        self.down_tokens = 0.0
        self.uplink: deque[_Queued] = deque()
        self.downlink: deque[_Queued] = deque()
        self.next_frame_seq = 0
        self.next_ack_seq = 0
        self.delivered_count = 0
        self.dropped_frames = 0

    def _ack(self, command: Mapping[str, Any], status: str,
             reason: str | None, latency: float) -> _Queued:
        body = {"command_id": command.get("id", "?"), "status": status}
        if reason is not None:
            body["reason"] = reason
        message = make_message("ack", self.next_ack_seq, self.time, body)
        self.next_ack_seq += 1
        return _Queued(message=message, data=encode_message(message),
                       eligible_t=self.time + latency)


def session_step(session: Session, outgoing_frames: Sequence[Mapping],
                 incoming: Sequence[bytes | Mapping], link: LinkStatus,
                 mode: ModeState, dt: float) -> SessionStepResult:
    """Advance the transport session by one tick of length ``dt``.

    ``outgoing_frames`` are telemetry bodies to send to the operator;
    ``incoming`` are raw command bytes (or message dicts) from the operator.
    Malformed or mode-illegal commands produce rejection acks; legal
    commands are returned once their latency has elapsed and bandwidth
    allows, exactly once and in order.
    """
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    session.time += dt
    now = session.time
    eps = 1e-9

    if link.available:
        cap = link.bandwidth_kbps * 1000.0 * session.bucket_depth_s
        session.up_tokens = min(session.up_tokens
                                + link.bandwidth_kbps * 1000.0 * dt, cap)
        session.down_tokens = min(session.down_tokens
                                  + link.bandwidth_kbps * 1000.0 * dt, cap)

    delivered: list[dict] = []
    rejections: list[dict] = []

    for item in incoming:
        try:
            message = (decode_message(item) if isinstance(item, (bytes,
                       bytearray)) else validate_message(item))
        except SchemaError as err:
            ack = session._ack({}, "rejected", f"schema-error {err}", 0.0)
            session.downlink.append(ack)
            rejections.append(ack.message)
            continue
        if message["type"] != "command":
            ack = session._ack(message.get("body", {}), "rejected",
                               "not-a-command", 0.0)
            session.downlink.append(ack)
            rejections.append(ack.message)
            continue
        command = message["body"]
        if command["kind"] == CommandKind.EMERGENCY_STOP.value:
            # Safety backstop: skips latency, tokens, even availability.
            delivered.append(command)
            session.delivered_count += 1
            session.downlink.append(session._ack(command, "accepted", None,
                                                 link.latency_s))
            continue
        session.uplink.append(_Queued(message=message,
                                      data=encode_message(message),
                                      eligible_t=now + link.latency_s))

    dropped = 0
    for body in outgoing_frames:
        message = make_message("telemetry", session.next_frame_seq, now, body)
        session.next_frame_seq += 1
        session.downlink.append(_Queued(message=message,
                                        data=encode_message(message),
                                        eligible_t=now + link.latency_s))
        while len(session.downlink) > session.frame_buffer:
            index = next((i for i, q in enumerate(session.downlink)
                          if q.message["type"] == "telemetry"), None)
            if index is None:
                break
            del session.downlink[index]
            dropped += 1
    session.dropped_frames += dropped

    if link.available:
        while session.uplink:
            head = session.uplink[0]
            if head.eligible_t > now + eps:
                break
            if head.size_bits > session.up_tokens:
                break
            session.up_tokens -= head.size_bits
            session.uplink.popleft()
            command = head.message["body"]
            reason = validate_command_for_mode(command, mode)
            if reason is not None:
                ack = session._ack(command, "rejected", reason,
                                   link.latency_s)
                session.downlink.append(ack)
                rejections.append(ack.message)
            else:
                delivered.append(command)
                session.delivered_count += 1
                session.downlink.append(session._ack(command, "accepted",
                                                     None, link.latency_s))

    transmitted: list[bytes] = []
    if link.available:
        while session.downlink:
            head = session.downlink[0]
            if head.eligible_t > now + eps:
                break
            if head.size_bits > session.down_tokens:
                break
            session.down_tokens -= head.size_bits
            session.downlink.popleft()
            transmitted.append(head.data)

    return SessionStepResult(delivered_commands=delivered,
                             transmitted_frames=transmitted,
                             rejections=rejections, dropped_frames=dropped)
