"""Reference message corpus for byte-stability tests.

Each entry is a hand-written wire message; the canonical encodings live in
tests/golden/messages.jsonl (one line per entry, same order).  The corpus
deliberately mixes minimal and maximal bodies, integer-valued floats,
unicode ids, negative zero and exponent-formatted numbers so any change in
canonical serialization shows up as a byte diff.
"""

V = 1


def _telemetry_body(limbs, faults, power_overrides=None, link_overrides=None):
    power = {"source": "battery", "soc_wh": 352.8, "bus_v": 25.2,
             "total_w": 87.5, "mean_w": 85.125, "endurance_h": 4.144}
    power.update(power_overrides or {})
    link = {"kind": "umbilical", "available": True,
            "bandwidth_kbps": 100000.0, "latency_ms": 1.0}
    link.update(link_overrides or {})
    return {
        "vehicle": {"x": 1.5, "y": -2.25, "z": 0.75, "psi": 0.7853981633974483,
                    "u": 0.9, "v": -0.05, "r": 0.01, "w": 0.0},
        "nav": {"x": 1.493, "y": -2.261, "psi": 0.786,
                "cov": [0.01, 0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0, 0.001]},
        "mode": {"op": "EXP", "nav": "AUTNAV", "link": "TET"},
        "limbs": limbs,
        "power": power,
        "link": link,
        "faults": faults,
        "guidance": {"active_waypoint": 2, "cross_track_error": -0.412,
                     "done": False},
    }


_LIMB = {"id": "port-0", "tip": [0.1, 0.0, 0.55],
         "direction": [0.05, 0.0, 0.9987], "tendon_dl": [0.001, 0.0,
                                                         -0.001, 0.0]}

CORPUS = [
    # -- telemetry --
    {"v": V, "type": "telemetry", "seq": 0, "t": 0.0,
     "body": _telemetry_body([], [])},
    {"v": V, "type": "telemetry", "seq": 17, "t": 1.7000000000000002,
     "body": _telemetry_body([_LIMB,
                              {"id": "stbd-0", "tip": [0.1, -0.0, 0.55],
                               "direction": [0.05, 0.0, 0.9987],
                               "tendon_dl": [0.0, 0.0, 0.0, 0.0]}],
                             ["overcurrent:limbs", "link-degraded"])},
    {"v": V, "type": "telemetry", "seq": 123456789, "t": 1234567.89,
     "body": _telemetry_body(
         [_LIMB], [],
         power_overrides={"source": "umbilical", "endurance_h": None,
                          "mean_w": 0.0},
         link_overrides={"kind": "vlc", "bandwidth_kbps": 5050.0,
                         "latency_ms": 5.0})},
    {"v": V, "type": "telemetry", "seq": 3, "t": 1e-09,
     "body": _telemetry_body(
         [], [], power_overrides={"soc_wh": 1e21, "total_w": 1.25e-07},
         link_overrides={"kind": "lte_wifi", "available": False,
                         "bandwidth_kbps": 0.0, "latency_ms": 50.0})},
    # -- commands --
    {"v": V, "type": "command", "seq": 1, "t": 5.0,
     "body": {"kind": "mode_transition", "id": "cmd-0001",
              "target": {"op": "INT", "nav": "MANCON", "link": "TET"}}},
    {"v": V, "type": "command", "seq": 2, "t": 5.25,
     "body": {"kind": "mode_transition", "id": "переход-7",
              "target": {"op": "INT", "nav": "SAUTPOS", "link": "NOWIRE"}}},
    {"v": V, "type": "command", "seq": 3, "t": 6.5,
     "body": {"kind": "waypoint_upload", "id": "wp-batch-1",
              "waypoints": [[15.0, 0.0], [30.0, 8.0], [45.0, 0.0]]}},
    {"v": V, "type": "command", "seq": 4, "t": 6.75,
     "body": {"kind": "waypoint_upload", "id": "wp-batch-2",
              "waypoints": [[1, 2]],  # integers normalize to floats
              "acceptance_radius": 1.5, "cruise_speed": 0.9}},
    {"v": V, "type": "command", "seq": 5, "t": 7.0,
     "body": {"kind": "fin_override", "id": "fin-sweep",
              "fins": [{"id": "bow-port", "swivel": 0.0, "mode": "SW",
                        "amplitude": 0.4, "frequency": 2.0}]}},
    {"v": V, "type": "command", "seq": 6, "t": 7.1,
     "body": {"kind": "fin_override", "id": "fin-pair",
              "fins": [{"id": "stern-port", "swivel": 1.5707963267948966,
                        "mode": "TW", "amplitude": 0.5, "frequency": 3.0,
                        "phase": 3.141592653589793},
                       {"id": "stern-stbd", "swivel": -1.5707963267948966,
                        "mode": "TW", "amplitude": 0.5, "frequency": 3.0,
                        "phase": 0.0}]}},
    {"v": V, "type": "command", "seq": 7, "t": 8.0,
     "body": {"kind": "limb_master", "id": "master-tick-400",
              "limb": 0, "increment": [0.001, -0.002, 0.0005],
              "clutch": True}},
    {"v": V, "type": "command", "seq": 8, "t": 8.02,
     "body": {"kind": "limb_master", "id": "master-tick-401",
              "limb": 3, "increment": [-0.0, 0.0, -0.0025],
              "clutch": False, "scale": 0.5}},
    {"v": V, "type": "command", "seq": 9, "t": 9.0,
     "body": {"kind": "jet_fire", "id": "jet-burst",
              "pump_rate": 0.8, "valve_open": True,
              "nozzle_angle": -0.3490658503988659}},
    {"v": V, "type": "command", "seq": 10, "t": 9.5,
     "body": {"kind": "jet_fire", "id": "jet-recharge",
              "pump_rate": 1, "valve_open": False, "nozzle_angle": 0}},
    {"v": V, "type": "command", "seq": 11, "t": 10.0,
     "body": {"kind": "emergency_stop", "id": "estop-1"}},
    {"v": V, "type": "command", "seq": 4294967296, "t": -0.0,
     "body": {"kind": "emergency_stop", "id": "estop-负零"}},
    # -- acks --
    {"v": V, "type": "ack", "seq": 0, "t": 5.001,
     "body": {"command_id": "cmd-0001", "status": "accepted"}},
    {"v": V, "type": "ack", "seq": 1, "t": 5.002,
     "body": {"command_id": "cmd-0002", "status": "rejected",
              "reason": "limb-master-requires-teleop-mode: current mode is "
                        "EXP/AUTNAV/TET"}},
    {"v": V, "type": "ack", "seq": 2, "t": 5.003,
     "body": {"command_id": "cmd-0003", "status": "accepted",
              "reason": "resent"}},
    {"v": V, "type": "ack", "seq": 3, "t": 0.30000000000000004,
     "body": {"command_id": "схема-ок", "status": "rejected",
              "reason": "schema-error $.body.kind: missing required field"}},
]
