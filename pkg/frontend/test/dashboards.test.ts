import { describe, expect, it } from "vitest";

import { Dashboards } from "../src/dashboards.js";
import { parseScenario } from "../src/scenario.js";
import { ConsoleSession } from "../src/session.js";
import { loadFixture, RecordedServerStub } from "./stub.js";

const fixture = loadFixture();
const scenario = parseScenario(fixture.scenario);

function makeBoards(): {
  session: ConsoleSession;
  stub: RecordedServerStub;
  boards: Dashboards;
} {
  const session = new ConsoleSession();
  const stub = new RecordedServerStub(fixture);
  const boards = new Dashboards(session, scenario);
  stub.connect(session);
  return { session, stub, boards };
}

describe("power panel", () => {
  it("shows unbounded endurance while on the umbilical", () => {
    const { stub, boards } = makeBoards();
    expect(boards.power().source).toBeNull();
    stub.deliver(1);
    const power = boards.power();
    expect(power.source).toBe("umbilical");
    expect(power.endurance).toBe("unbounded");
    expect(power.baseLoads).toEqual({
      computers: 40.0,
      comms: 15.0,
      payload: 20.0,
    });
  });

  it("switches to a finite, shrinking endurance after the wire cut", () => {
    const { session, stub, boards } = makeBoards();
    const socs: number[] = [];
    const endurances: number[] = [];
    session.onTelemetry((frame) => {
      if (frame.body.power.source === "battery") {
        socs.push(frame.body.power.soc_wh);
        const endurance = frame.body.power.endurance_h;
        if (endurance !== null) {
          endurances.push(endurance);
        }
      }
    });
    stub.deliverAll();
    const power = boards.power();
    expect(power.source).toBe("battery");
    expect(power.endurance).toBeCloseTo(1.2985, 4);
    expect(power.socWh).toBeCloseTo(352.4225, 4);
    // The recording's battery phase drains monotonically.
    expect(socs).toHaveLength(49);
    expect(endurances).toHaveLength(49);
    for (let i = 1; i < socs.length; i += 1) {
      expect(socs[i]!).toBeLessThan(socs[i - 1]!);
    }
    expect(socs[0]!).toBeCloseTo(352.7924, 4);
  });

  it("keeps short histories for the sparklines", () => {
    const { session, stub, boards } = makeBoards();
    stub.deliverAll();
    const soc = boards.socSparkline();
    const load = boards.loadSparkline();
    expect(soc).toHaveLength(240);
    expect(load).toHaveLength(240);
    expect(soc[soc.length - 1]!.t).toBeCloseTo(23.91, 6);
    expect(soc[soc.length - 1]!.value)
      .toBe(session.latest!.body.power.soc_wh);
    expect(load[load.length - 1]!.value)
      .toBe(session.latest!.body.power.total_w);
  });
});

describe("link panel", () => {
  it("tracks the carrier change at the wire cut", () => {
    const { stub, boards } = makeBoards();
    stub.deliverWhile((next) => next.t <= 19.02);
    expect(boards.link().kind).toBe("umbilical");
    expect(boards.link().bandwidthKbps).toBe(100000.0);
    stub.deliverAll();
    const link = boards.link();
    expect(link.kind).toBe("vlc");
    expect(link.available).toBe(true);
    expect(link.latencyMs).toBe(5.0);
    expect(link.indicator).toBe("ok");
    expect(link.missedFrames).toBe(0);
  });

  it("degrades on telemetry gaps and goes stale on disconnect", () => {
    const { session, stub, boards } = makeBoards();
    const telemetryRaw = fixture.downlink.filter(
      (raw) => (JSON.parse(raw) as { type: string }).type === "telemetry");
    for (const [i, raw] of telemetryRaw.entries()) {
      if (i >= 30 && i < 33) {
        continue; // three frames lost in transit
      }
      if (i > 40) {
        break;
      }
      session.handleRaw(raw);
    }
    let link = boards.link();
    expect(link.indicator).toBe("degraded");
    expect(link.missedFrames).toBe(3);
    stub.close();
    link = boards.link();
    expect(link.indicator).toBe("stale");
    expect(link.missedFrames).toBe(3);
  });
});

describe("fault log", () => {
  function faultedFrame(index: number, faults: string[]): string {
    const msg = JSON.parse(fixture.downlink[index]!) as {
      body: { faults: string[] };
    };
    msg.body.faults = faults;
    return JSON.stringify(msg);
  }

  it("surfaces a fault on the frame it appears and remembers first sight",
    () => {
      const { session, stub, boards } = makeBoards();
      stub.deliver(5);
      expect(boards.activeFaults()).toEqual([]);
      // Fault raised on the frame at t=0.51.
      session.handleRaw(faultedFrame(5, ["pump-overtemp"]));
      expect(boards.activeFaults()).toEqual(["pump-overtemp"]);
      const entry = boards.faultLog()[0]!;
      expect(entry.firstSeen).toBeCloseTo(0.51, 9);
      expect(entry.active).toBe(true);
      // Cleared on the next clean frame, but kept on the log.
      stub.deliver(2);
      expect(boards.activeFaults()).toEqual([]);
      expect(boards.faultLog()).toHaveLength(1);
      expect(boards.faultLog()[0]!.active).toBe(false);
      // Re-raised later: first-seen time survives.
      session.handleRaw(faultedFrame(8, ["pump-overtemp"]));
      expect(boards.faultLog()[0]!.firstSeen).toBeCloseTo(0.51, 9);
      expect(boards.activeFaults()).toEqual(["pump-overtemp"]);
    });

  it("orders the log with active faults first", () => {
    const { session, stub, boards } = makeBoards();
    stub.deliver(3);
    session.handleRaw(faultedFrame(3, ["a-fault"]));
    session.handleRaw(faultedFrame(4, ["b-fault"])); // a-fault clears here
    const log = boards.faultLog();
    expect(log.map((entry) => [entry.name, entry.active])).toEqual([
      ["b-fault", true],
      ["a-fault", false],
    ]);
  });
});
