"""Power source modeling, endurance estimation and electrical fault detection.

Two sources: a 6S4P Li-Ion battery (25.2 V x 14 Ah = 352.8 Wh) feeding a
25.2 V bus, and a surface umbilical (400 V feed, 3 kW budget) feeding a
regulated 28 V bus while recharging the battery.  Per-subsystem loads are
integrated into the state of charge each step; exceeding the umbilical
budget sheds subsystems in fixed priority order (payload first, computers
last).  Endurance divides the state of charge by a 60 s rolling mean load.
Overcurrent faults must persist beyond a 1 s debounce window before they
latch; every fault is reported as an event for the mode machine.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

BATTERY_VOLTAGE = 25.2
BATTERY_AMP_HOURS = 14.0
BATTERY_CAPACITY_WH = BATTERY_VOLTAGE * BATTERY_AMP_HOURS
UMBILICAL_BUS_VOLTAGE = 28.0
UMBILICAL_BUDGET_W = 3000.0
ROLLING_WINDOW_S = 60.0
DEBOUNCE_S = 1.0

SUBSYSTEMS = ("propulsion", "limbs", "computers", "comms", "payload")
# Shed order: lowest priority first (payload < comms < limbs < propulsion
# < computers).
SHED_ORDER = ("payload", "comms", "limbs", "propulsion", "computers")

DEFAULT_OVERCURRENT_W = {
    "propulsion": 1500.0,
    "limbs": 600.0,
    "computers": 200.0,
    "comms": 150.0,
    "payload": 400.0,
}
UNDERVOLTAGE_THRESHOLD = 22.0


class PowerSource(str, enum.Enum):
    BATTERY = "battery"
    UMBILICAL = "umbilical"


class FaultKind(str, enum.Enum):
    OVERCURRENT = "overcurrent"
    UNDERVOLTAGE = "undervoltage"
    BATTERY_DEPLETED = "battery-depleted"
    BUDGET_OVERLOAD = "budget-overload"


@dataclass(frozen=True)
class FaultEvent:
    kind: FaultKind
    subsystem: str
    t: float


@dataclass(frozen=True)
class PowerParams:
    capacity_wh: float = BATTERY_CAPACITY_WH
    charger_w: float = 300.0
    budget_w: float = UMBILICAL_BUDGET_W
    overcurrent_w: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_OVERCURRENT_W))
    undervoltage_v: float = UNDERVOLTAGE_THRESHOLD

    def validate(self) -> None:
        if not self.capacity_wh > 0.0:
            raise ValueError("battery capacity must be > 0")
        if self.charger_w < 0.0:
            raise ValueError("charger power must be >= 0")


@dataclass(frozen=True)
class PowerState:
    """Electrical snapshot: source, charge, bus voltage, loads, statistics.

    ``window`` holds (duration, energy_ws) bins of the 60 s rolling-load
    window; ``over_durations`` tracks per-subsystem time above the
    overcurrent threshold for debouncing; ``shed`` lists subsystems dropped
    by the umbilical budget.
    """

    source: PowerSource = PowerSource.BATTERY
    soc_wh: float = BATTERY_CAPACITY_WH
    bus_voltage: float = BATTERY_VOLTAGE
    loads: Mapping[str, float] = field(default_factory=dict)
    t: float = 0.0
    window: tuple[tuple[float, float], ...] = ()
    over_durations: Mapping[str, float] = field(default_factory=dict)
    shed: tuple[str, ...] = ()
    faults: tuple[FaultEvent, ...] = ()

    @property
    def total_load_w(self) -> float:
        return sum(self.loads.values())

    @property
    def rolling_mean_w(self) -> float:
        duration = sum(b[0] for b in self.window)
        if duration <= 0.0:
            return 0.0
        return sum(b[1] for b in self.window) / duration


def _push_window(window: tuple[tuple[float, float], ...], dt: float,
                 power: float) -> tuple[tuple[float, float], ...]:
    bins = list(window)
    bins.append((dt, power * dt))
    total = sum(b[0] for b in bins)
    while bins and total - bins[0][0] >= ROLLING_WINDOW_S:
        total -= bins[0][0]
        bins.pop(0)
    # Merge adjacent sub-second bins so the window stays O(window seconds).
    merged: list[tuple[float, float]] = []
    for b in bins:
        if merged and merged[-1][0] < 1.0:
            merged[-1] = (merged[-1][0] + b[0], merged[-1][1] + b[1])
        else:
            merged.append(b)
    return tuple(merged)


def step_power(state: PowerState, loads: Mapping[str, float],
               source: PowerSource, params: PowerParams,
               dt: float) -> PowerState:
    """Advance the electrical state by ``dt`` under the given subsystem loads.

    On battery: soc -= total * dt / 3600, with a battery-depleted fault when
    the charge hits zero.  On umbilical: the battery recharges at the
    charger rate (clamped at capacity) and loads above the 3 kW budget shed
    subsystems in priority order, raising a budget-overload fault.
    Overcurrent faults latch only after the threshold is exceeded
    continuously for more than 1 s.
    """
    params.validate()
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    for name in loads:
        if name not in SUBSYSTEMS:
            raise ValueError(f"unknown subsystem {name!r}")
    loads = {name: max(0.0, float(loads.get(name, 0.0)))
             for name in SUBSYSTEMS}
    t = state.t + dt
    faults: list[FaultEvent] = []

    shed: tuple[str, ...] = ()
    if source is PowerSource.UMBILICAL:
        effective = dict(loads)
        if sum(effective.values()) > params.budget_w:
            faults.append(FaultEvent(kind=FaultKind.BUDGET_OVERLOAD,
                                     subsystem="bus", t=t))
            dropped = []
            for name in SHED_ORDER:
                if sum(effective.values()) <= params.budget_w:
                    break
                if effective[name] > 0.0:
                    effective[name] = 0.0
                    dropped.append(name)
            shed = tuple(dropped)
        total = sum(effective.values())
        soc = min(state.soc_wh + params.charger_w * dt / 3600.0,
                  params.capacity_wh)
        bus = UMBILICAL_BUS_VOLTAGE
        applied = effective
    else:
        total = sum(loads.values())
        soc = state.soc_wh - total * dt / 3600.0
        if soc <= 0.0 and state.soc_wh > 0.0:
            faults.append(FaultEvent(kind=FaultKind.BATTERY_DEPLETED,
                                     subsystem="battery", t=t))
        soc = max(soc, 0.0)
        bus = BATTERY_VOLTAGE if soc > 0.0 else 0.0
        applied = loads

    over = dict(state.over_durations)
    for name in SUBSYSTEMS:
        limit = params.overcurrent_w.get(name, math.inf)
        if applied[name] > limit:
            over[name] = over.get(name, 0.0) + dt
            if over[name] > DEBOUNCE_S and over[name] - dt <= DEBOUNCE_S:
                faults.append(FaultEvent(kind=FaultKind.OVERCURRENT,
                                         subsystem=name, t=t))
        else:
            over[name] = 0.0
    if bus < params.undervoltage_v:
        faults.append(FaultEvent(kind=FaultKind.UNDERVOLTAGE,
                                 subsystem="bus", t=t))

    return PowerState(source=source, soc_wh=soc, bus_voltage=bus,
                      loads=applied, t=t,
                      window=_push_window(state.window, dt, total),
                      over_durations=over, shed=shed, faults=tuple(faults))


def endurance_estimate(state: PowerState) -> tuple[float, bool]:
    """Remaining endurance in hours from charge over rolling mean load.

    Returns (hours, unbounded).  On umbilical power, or with a zero rolling
    load, the endurance is unbounded (hours is inf).
    """
    if state.source is PowerSource.UMBILICAL:
        return math.inf, True
    mean = state.rolling_mean_w
    if mean <= 0.0:
        return math.inf, True
    return state.soc_wh / mean, False


def detect_faults(state: PowerState) -> tuple[FaultEvent, ...]:
    """Fault events raised by the last step (mode machine ingests these)."""
    return state.faults
