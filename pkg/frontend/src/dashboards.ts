/**
 * Status dashboards: power budget, fault annunciator, and link health.
 *
 * Everything here is a pure projection of the latest telemetry frame plus
 * a little memory (fault first-seen times, short history rings for the
 * sparklines).  Endurance and state of charge come straight from the
 * vehicle's own accounting -- the console displays, it does not re-derive.
 */

import { ConsoleSession } from "./session.js";
import type { ConsoleScenario } from "./scenario.js";
import type { LinkTelemetry, PowerTelemetry } from "./messages.js";

export interface PowerState {
  source: "umbilical" | "battery" | null;
  socWh: number | null;
  busV: number | null;
  totalW: number | null;
  meanW: number | null;
  /** Hours remaining; "unbounded" while feeding from the umbilical. */
  endurance: number | "unbounded" | null;
  /** Static per-subsystem draw for the budget table, from the scenario. */
  baseLoads: Record<string, number>;
}

export interface FaultEntry {
  name: string;
  /** Telemetry time when the fault first appeared. */
  firstSeen: number;
  active: boolean;
}

export interface LinkState {
  kind: "umbilical" | "vlc" | "lte_wifi" | null;
  available: boolean;
  bandwidthKbps: number | null;
  latencyMs: number | null;
  /** Stream health from sequence numbers: ok / degraded / stale. */
  indicator: "ok" | "degraded" | "stale";
  missedFrames: number;
}

export interface HistoryPoint {
  t: number;
  value: number;
}

const HISTORY_LIMIT = 600;

export class Dashboards {
  private readonly session: ConsoleSession;
  private readonly baseLoads: Record<string, number>;
  private readonly faults = new Map<string, FaultEntry>();
  private readonly socHistory: HistoryPoint[] = [];
  private readonly loadHistory: HistoryPoint[] = [];

  constructor(session: ConsoleSession, scenario: ConsoleScenario) {
    this.session = session;
    this.baseLoads = { ...scenario.baseLoads };
    session.onTelemetry((frame) => {
      for (const name of frame.body.faults) {
        const known = this.faults.get(name);
        if (known === undefined) {
          this.faults.set(name, { name, firstSeen: frame.t, active: true });
        } else {
          known.active = true;
        }
      }
      for (const entry of this.faults.values()) {
        if (!frame.body.faults.includes(entry.name)) {
          entry.active = false;
        }
      }
      pushHistory(this.socHistory, frame.t, frame.body.power.soc_wh);
      pushHistory(this.loadHistory, frame.t, frame.body.power.total_w);
    });
  }

  power(): PowerState {
    const block: PowerTelemetry | null =
      this.session.latest === null ? null : this.session.latest.body.power;
    return {
      source: block === null ? null : block.source,
      socWh: block === null ? null : block.soc_wh,
      busV: block === null ? null : block.bus_v,
      totalW: block === null ? null : block.total_w,
      meanW: block === null ? null : block.mean_w,
      endurance:
        block === null
          ? null
          : block.endurance_h === null
            ? "unbounded"
            : block.endurance_h,
      baseLoads: this.baseLoads,
    };
  }

  /** All faults ever seen this session, active ones first, oldest first. */
  faultLog(): FaultEntry[] {
    return [...this.faults.values()].sort((a, b) =>
      a.active === b.active ? a.firstSeen - b.firstSeen : a.active ? -1 : 1);
  }

  activeFaults(): string[] {
    return this.faultLog().filter((f) => f.active).map((f) => f.name);
  }

  link(): LinkState {
    const block: LinkTelemetry | null =
      this.session.latest === null ? null : this.session.latest.body.link;
    const quality = this.session.linkQuality();
    return {
      kind: block === null ? null : block.kind,
      available: block === null ? false : block.available,
      bandwidthKbps: block === null ? null : block.bandwidth_kbps,
      latencyMs: block === null ? null : block.latency_ms,
      indicator: this.session.linkIndicator(),
      missedFrames: quality.missedFrames,
    };
  }

  socSparkline(): HistoryPoint[] {
    return [...this.socHistory];
  }

  loadSparkline(): HistoryPoint[] {
    return [...this.loadHistory];
  }
}

function pushHistory(ring: HistoryPoint[], t: number, value: number): void {
  ring.push({ t, value });
  if (ring.length > HISTORY_LIMIT) {
    ring.shift();
  }
}
