"""Deterministic digital-twin simulator and control stack for a soft
underwater robot that swims with undulating fins and a pulsed water jet,
navigates by dead reckoning with landmark corrections, and teleoperates
continuum limbs against a locally estimated contact environment.
"""

__version__ = "0.1.0"

from .dynamics import VehicleParams, VehicleState, Wrench, step_dynamics
from .harness import MissionLoop, MissionSummary, read_log, verify_log
from .modes import LinkMode, ModeState, NavMode, OpMode
from .scenario import Scenario, demo_mission, load_scenario

__all__ = [
    "__version__",
    "VehicleParams", "VehicleState", "Wrench", "step_dynamics",
    "MissionLoop", "MissionSummary", "read_log", "verify_log",
    "LinkMode", "ModeState", "NavMode", "OpMode",
    "Scenario", "demo_mission", "load_scenario",
]
