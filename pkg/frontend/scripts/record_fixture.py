"""Record a gateway session for the console test suite.

Runs a short scripted mission through the simulator's mission loop and
captures every message the transport session transmits downlink -- byte for
byte the strings the operator gateway would push over its WebSocket.  The
recording, together with the scenario snapshot the gateway serves from
``GET /scenario``, is written to ``test/fixtures/recorded_session.json``.

The mission is arranged so the recording exercises everything the console
renders:

* an autonomous transit segment (pose, covariance, guidance, link data),
* a deliberately illegal limb command whose rejection ack carries the
  verbatim reason string the mode panel must display,
* an accepted transition into intervention/manual control,
* a teleoperated press of the bow limb into a contact plate (frames with
  the tip descending past the proxy surface, for the force-bar tests),
* an accepted waypoint upload and the transition back to autonomous
  navigation,
* a switch to wireless operation so battery-sourced frames appear (state
  of charge strictly draining, for the dashboard tests).

Regenerate with:  python3 scripts/record_fixture.py
"""
from __future__ import annotations

import json
from pathlib import Path

from squidsim.harness import MissionLoop
from squidsim.limbs import LimbConfig, LimbGeometry, forward_kinematics
from squidsim.scenario import scenario_from_dict

FIXTURE = Path(__file__).resolve().parent.parent / "test" / "fixtures" \
    / "recorded_session.json"


def fixture_scenario():
    geometry = LimbGeometry()
    config = LimbConfig(kappa=(1.2,) * geometry.n_segments,
                        phi=(0.0,) * geometry.n_segments)
    tip = forward_kinematics(config, geometry).position
    plate_z = float(tip[2]) - 0.05
    plate_center = (float(tip[0]), 0.0, plate_z)
    sample_z = plate_z - 0.003
    cluster = [
        [plate_center[0] + dx, dy, sample_z]
        for dx, dy in ((0.05, 0.05), (0.05, -0.05), (-0.05, 0.05),
                       (-0.05, -0.05), (0.0, 0.0))
    ]

    commands = []
    # Illegal while EXP/AUTNAV: the recorded rejection ack carries the
    # verbatim reason string the mode panel renders.
    commands.append({"t": 2.0, "command": {
        "kind": "limb_master", "id": "early-limb", "limb": 0,
        "increment": [0.0, 0.0, 0.001], "clutch": True}})
    commands.append({"t": 6.0, "command": {
        "kind": "mode_transition", "id": "go-teleop",
        "target": {"op": "INT", "nav": "MANCON", "link": "TET"}}})
    # 30 master steps of 2.5 mm: ~20 free, then ~25 mm of commanded
    # penetration -- the recording gets a run of frames with the tip
    # pressed progressively deeper into the plate.
    for i in range(30):
        commands.append({"t": 8.0 + 0.1 * i, "command": {
            "kind": "limb_master", "id": f"push-{i:03d}", "limb": 0,
            "increment": [0.0, 0.0, -0.0025], "clutch": True}})
    commands.append({"t": 14.0, "command": {
        "kind": "waypoint_upload", "id": "recorded-route",
        "waypoints": [[14.0, -2.0]],
        "acceptance_radius": 2.0, "cruise_speed": 0.7}})
    commands.append({"t": 16.0, "command": {
        "kind": "mode_transition", "id": "back-autnav",
        "target": {"op": "INT", "nav": "AUTNAV", "link": "TET"}}})
    commands.append({"t": 19.0, "command": {
        "kind": "mode_transition", "id": "cut-the-wire",
        "target": {"op": "INT", "nav": "AUTNAV", "link": "NOWIRE"}}})

    return scenario_from_dict({
        "name": "console-fixture",
        "duration": 24.0,
        "dt": 0.01,
        "seed": 11,
        "initial": {"x": 0.0, "y": 0.0, "z": 0.0, "psi": 0.0,
                    "mode": {"op": "EXP", "nav": "AUTNAV", "link": "TET"}},
        "landmarks": [{"id": 1, "x": 4.0, "y": 3.0},
                      {"id": 2, "x": 9.0, "y": -2.0}],
        "plan": {"waypoints": [[8.0, 0.0], [16.0, 3.0]],
                 "acceptance_radius": 1.5, "cruise_speed": 0.9},
        "los": {"lookahead": 2.4, "gamma": 0.05},
        "depth_schedule": [[3.0, 1.5]],
        # Ahead of the final leg: the optical link needs range and facing,
        # so the wire-cut at t=19 only goes through with the base out front.
        "base_station": [14.0, -2.0],
        "limb": {
            "mounts": [[0.55, 0.0, 0.0]],
            "initial_kappa": list(config.kappa),
            "initial_phi": list(config.phi),
        },
        "environment": {
            "contact_planes": [{
                "normal": [0.0, 0.0, 1.0],
                "offset": plate_z,
                "center": list(plate_center),
                "half_extents": [0.4, 0.4],
                "frame": "limb", "limb_index": 0,
            }],
            "contact_stiffness": 500.0,
            "depth_sample_clusters": [cluster],
        },
        "scripted_commands": commands,
    })


def main() -> None:
    scenario = fixture_scenario()
    loop = MissionLoop(scenario)
    downlink: list[str] = []
    ticks = int(round(scenario.duration / scenario.dt))
    for _ in range(ticks):
        loop.tick()
        while loop.outbox:
            downlink.append(loop.outbox.popleft().decode("utf-8"))

    recording = {
        "scenario": scenario.to_dict(),
        "downlink": downlink,
    }
    FIXTURE.parent.mkdir(parents=True, exist_ok=True)
    with open(FIXTURE, "w", encoding="utf-8") as fh:
        json.dump(recording, fh, indent=1)
        fh.write("\n")
    kinds = {}
    for raw in downlink:
        msg = json.loads(raw)
        key = msg["type"]
        if key == "ack":
            key = f"ack/{msg['body']['status']}"
        kinds[key] = kinds.get(key, 0) + 1
    print(f"recorded {len(downlink)} downlink messages -> {FIXTURE}")
    print("  " + ", ".join(f"{k}: {n}" for k, n in sorted(kinds.items())))


if __name__ == "__main__":
    main()
