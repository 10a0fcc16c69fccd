import pytest

from squidsim.modes import LinkMode, NavMode, OpMode
from squidsim.scenario import (Scenario, ScenarioError, demo_mission,
                               load_scenario, save_scenario,
                               scenario_from_dict)


def test_empty_dict_yields_defaults():
    scenario = scenario_from_dict({})
    assert scenario.name == "unnamed"
    assert scenario.duration == 60.0
    assert scenario.dt == 0.01
    assert scenario.seed == 0
    assert scenario.initial_mode.op is OpMode.EXP
    assert scenario.initial_mode.nav is NavMode.AUTNAV
    assert scenario.initial_mode.link is LinkMode.TET
    assert scenario.plan is None
    assert scenario.vehicle.mass == 30.0
    assert scenario.power.capacity_wh == pytest.approx(352.8)


def test_validation_collects_every_error():
    bad = {
        "duration": -3.0,
        "dt": 0.5,
        "seed": -1,
        "initial": {"z": -2.0,
                    "mode": {"op": "EXP", "nav": "MANCON", "link": "TET"}},
        "vehicle": {"mass": -10.0, "current": [1.0]},
        "fins": {"thrust_coeff": 0.0},
        "limb": {"n_segments": 0},
        "plan": {"waypoints": []},
        "depth_schedule": [[5.0, 1.0], [4.0, 2.0], [6.0, -1.0]],
        "base_loads": {"sonar": 5.0, "comms": -1.0},
        "rates": {"telemetry": 0},
        "landmarks": [{"id": 1}],
        "scripted_commands": [{"t": -1.0, "command": {"kind": "x"}}],
    }
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(bad)
    errors = err.value.errors
    expected = [
        "duration: must be > 0",
        "dt: must be <= 0.1",
        "seed: must be >= 0",
        "initial.z: must be >= 0",
        "initial.mode: MANCON/SAUTPOS requires op INT",
        "vehicle.mass: must be > 0",
        "vehicle.current: must be 2 numbers",
        "fins.thrust_coeff: must be > 0",
        "limb.n_segments: must be >= 1",
        "plan.waypoints: must be a non-empty list of [x, y]",
        "depth_schedule[1]: times must be strictly increasing",
        "depth_schedule[2]: depth must be >= 0",
        "base_loads.sonar: unknown subsystem",
        "base_loads.comms: must be a number >= 0",
        "rates.telemetry: must be >= 1",
        "landmarks[0]: must have id, x, y",
        "scripted_commands[0].t: must be a number >= 0",
    ]
    for message in expected:
        assert message in errors, message
    # Nothing stopped early: every problem above was seen in one pass.
    assert len(errors) >= len(expected)


def test_validation_rejects_non_mapping():
    with pytest.raises(ScenarioError):
        scenario_from_dict([1, 2, 3])
    with pytest.raises(ScenarioError):
        scenario_from_dict("scenario")


def test_booleans_are_not_numbers():
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict({"duration": True})
    assert "duration: must be a number" in err.value.errors


def test_yaml_file_round_trip(tmp_path):
    scenario = demo_mission(seed=7)
    path = tmp_path / "mission.yaml"
    save_scenario(scenario, path)
    loaded = load_scenario(path)
    assert loaded.to_dict() == scenario.to_dict()
    assert isinstance(loaded, Scenario)


def test_yaml_empty_and_invalid(tmp_path):
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert load_scenario(empty).name == "unnamed"

    broken = tmp_path / "broken.yaml"
    broken.write_text("name: [unclosed")
    with pytest.raises(ScenarioError) as err:
        load_scenario(broken)
    assert err.value.errors[0].startswith("$: not valid YAML")


def test_scripted_commands_are_time_sorted():
    scenario = scenario_from_dict({"scripted_commands": [
        {"t": 9.0, "command": {"kind": "b"}},
        {"t": 1.0, "command": {"kind": "a"}},
        {"t": 4.0, "command": {"kind": "c"}},
    ]})
    assert [c.t for c in scenario.scripted_commands] == [1.0, 4.0, 9.0]


def test_demo_mission_shape():
    scenario = demo_mission(seed=42)
    assert scenario.name == "demo-mission"
    assert scenario.seed == 42
    assert scenario.duration == 230.0
    assert len(scenario.plan.waypoints) == 5
    assert len(scenario.landmarks.landmarks) == 6
    assert scenario.depth_schedule == ((10.0, 3.0), (170.0, 0.0))
    assert scenario.initial_limb_config is not None
    assert len(scenario.contact_planes) == 1
    plane = scenario.contact_planes[0]
    assert plane.frame == "limb"
    # The proxy's prior samples sit strictly past the true surface, so the
    # first real touch must trigger a reconciliation.
    sample_z = scenario.depth_sample_clusters[0][0][2]
    assert sample_z < plane.patch.offset
    kinds = [c.body["kind"] for c in scenario.scripted_commands]
    assert kinds.count("mode_transition") == 2
    assert kinds.count("limb_master") >= 20
    times = [c.t for c in scenario.scripted_commands]
    assert times == sorted(times)
    # The first limb command lands during the EXP phase, before the
    # intervention transition: it must be there to exercise rejection.
    first_limb = min(c.t for c in scenario.scripted_commands
                     if c.body["kind"] == "limb_master")
    first_transition = min(c.t for c in scenario.scripted_commands
                           if c.body["kind"] == "mode_transition")
    assert first_limb < first_transition


def test_to_dict_is_plain_data():
    import json
    snapshot = demo_mission().to_dict()
    json.dumps(snapshot)  # raises if anything non-serializable leaked in
    assert snapshot["rates"] == {"telemetry": 10, "master": 2, "sonar": 50,
                                 "gnss": 100}
    assert snapshot["initial"]["mode"] == {"op": "EXP", "nav": "AUTNAV",
                                           "link": "TET"}
