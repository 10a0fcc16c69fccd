import { describe, expect, it } from "vitest";

import { ConsoleSession } from "../src/session.js";
import { loadFixture, RecordedServerStub } from "./stub.js";

const fixture = loadFixture();

const telemetryRaw = fixture.downlink.filter(
  (raw) => (JSON.parse(raw) as { type: string }).type === "telemetry");

function connected(options = {}): {
  session: ConsoleSession;
  stub: RecordedServerStub;
} {
  const session = new ConsoleSession(options);
  const stub = new RecordedServerStub(fixture);
  stub.connect(session);
  return { session, stub };
}

describe("replaying the recorded session", () => {
  it("consumes the whole recording without a single dropped frame", () => {
    const { session, stub } = connected();
    expect(stub.deliverAll()).toBe(275);
    expect(session.badMessages).toBe(0);
    expect(session.latest?.t).toBeCloseTo(23.91, 6);
    expect(session.connection).toBe("connected");
    const quality = session.linkQuality();
    expect(quality.missedFrames).toBe(0);
    expect(quality.degraded).toBe(false);
    expect(session.linkIndicator()).toBe("ok");
  });
});

describe("telemetry-gap indicator", () => {
  it("counts missed frames and reports a degraded link", () => {
    const { session } = connected();
    // Replay the recording with frames 100..104 lost in transit.
    for (const [i, raw] of telemetryRaw.entries()) {
      if (i >= 100 && i < 105) {
        continue;
      }
      if (i > 105 + 3) {
        break;
      }
      session.handleRaw(raw);
    }
    const quality = session.linkQuality();
    expect(quality.missedFrames).toBe(5);
    expect(quality.degraded).toBe(true);
    expect(session.linkIndicator()).toBe("degraded");
  });

  it("clears the indicator after enough contiguous frames", () => {
    const { session } = connected({ recoveryFrames: 20 });
    for (const [i, raw] of telemetryRaw.entries()) {
      if (i >= 50 && i < 52) {
        continue; // two lost frames
      }
      if (i >= 72) {
        break; // 19 contiguous after the gap frame: still recovering
      }
      session.handleRaw(raw);
    }
    expect(session.linkQuality().missedFrames).toBe(2);
    expect(session.linkIndicator()).toBe("degraded");
    session.handleRaw(telemetryRaw[72]!); // 20th contiguous frame
    expect(session.linkIndicator()).toBe("ok");
    expect(session.linkQuality().degraded).toBe(false);
    // The damage stays on the books even once the link looks healthy.
    expect(session.linkQuality().missedFrames).toBe(2);
  });

  it("goes stale the moment the connection drops", () => {
    const { session, stub } = connected();
    stub.deliver(10);
    expect(session.linkIndicator()).toBe("ok");
    stub.close();
    expect(session.connection).toBe("disconnected");
    expect(session.linkIndicator()).toBe("stale");
    // The last frame stays visible for the map's frozen view.
    expect(session.latest?.seq).toBe(9);
  });
});

describe("schema-invalid frames", () => {
  it("drops bad frames without touching the rendered state", () => {
    const { session, stub } = connected();
    stub.deliver(3);
    const before = session.latest;
    expect(session.handleRaw("{garbage")).toBeNull();
    expect(session.handleRaw('{"v":2,"type":"telemetry"}')).toBeNull();
    expect(session.badMessages).toBe(2);
    expect(session.lastSchemaError).toContain("schema-error");
    expect(session.latest).toBe(before);
    // The stream recovers as soon as valid frames resume.
    stub.deliver(1);
    expect(session.latest?.seq).toBe(3);
    expect(session.linkQuality().missedFrames).toBe(0);
  });
});

describe("command lifecycle", () => {
  it("tracks a command from send to acceptance", () => {
    const { session, stub } = connected();
    stub.deliver(5);
    const pending = session.sendCommand({
      kind: "emergency_stop",
      id: session.nextCommandId("stop"),
    });
    expect(pending.status).toBe("pending");
    expect(stub.commands).toHaveLength(1);
    expect(stub.flushAcks()).toBe(1);
    expect(pending.status).toBe("accepted");
    expect(session.commandStatus(pending.id)?.status).toBe("accepted");
  });

  it("keeps rejection reasons verbatim on the pending record", () => {
    const { session, stub } = connected();
    stub.deliver(1);
    const reason =
      "manual-actuation-requires-int-mancon: current mode is EXP/AUTNAV/TET";
    stub.rejectNext(reason);
    const pending = session.sendCommand({
      kind: "jet_fire",
      id: session.nextCommandId("jet"),
      pump_rate: 0.5,
      valve_open: true,
      nozzle_angle: 0.0,
    });
    stub.flushAcks();
    expect(pending.status).toBe("rejected");
    expect(pending.reason).toBe(reason);
  });

  it("times out commands the vehicle never answers", () => {
    let nowMs = 1000;
    const { session, stub } = connected({
      now: () => nowMs,
      ackTimeoutMs: 5000,
    });
    stub.deliver(1);
    const pending = session.sendCommand({
      kind: "emergency_stop",
      id: session.nextCommandId("stop"),
    });
    nowMs += 4999;
    session.expirePending();
    expect(pending.status).toBe("pending");
    nowMs += 2;
    session.expirePending();
    expect(pending.status).toBe("timeout");
  });

  it("ignores acks addressed to other operators' commands", () => {
    const { session, stub } = connected();
    stub.deliver(1);
    const before = session.pendingCommands().length;
    session.handleRaw(JSON.stringify({
      v: 1, type: "ack", seq: 999, t: 1.0,
      body: { command_id: "someone-elses", status: "accepted" },
    }));
    expect(session.badMessages).toBe(0);
    expect(session.pendingCommands()).toHaveLength(before);
  });

  it("refuses to send while disconnected", () => {
    const { session, stub } = connected();
    stub.close();
    expect(() => session.sendCommand({
      kind: "emergency_stop",
      id: "stop-while-down",
    })).toThrow("not connected");
  });
});
