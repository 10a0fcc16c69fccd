import { describe, expect, it } from "vitest";

import { ManipulationView } from "../src/manipulation.js";
import { parseScenario } from "../src/scenario.js";
import { ConsoleSession } from "../src/session.js";
import { loadFixture, RecordedServerStub } from "./stub.js";

const fixture = loadFixture();
const scenario = parseScenario(fixture.scenario);

// Independent view of the proxy geometry, straight from the recording:
// every depth sample sits on one horizontal plane.
const cluster = (fixture.scenario.environment as {
  depth_sample_clusters: number[][][];
}).depth_sample_clusters[0]!;
const planeZ = cluster[0]![2]!;
const stiffness = 500;

interface TipFrame {
  t: number;
  tip: [number, number, number];
}

function telemetryTips(): { raw: string; frame: TipFrame }[] {
  return fixture.downlink
    .map((raw) => ({ raw, parsed: JSON.parse(raw) as Record<string, unknown> }))
    .filter(({ parsed }) => parsed.type === "telemetry")
    .map(({ raw, parsed }) => {
      const body = parsed.body as {
        limbs: { tip: [number, number, number] }[];
      };
      return {
        raw,
        frame: { t: parsed.t as number, tip: body.limbs[0]!.tip },
      };
    });
}

function makeRig(options = {}): {
  session: ConsoleSession;
  stub: RecordedServerStub;
  view: ManipulationView;
} {
  const session = new ConsoleSession();
  const stub = new RecordedServerStub(fixture);
  const view = new ManipulationView(session, scenario, options);
  stub.connect(session);
  return { session, stub, view };
}

describe("proxy fitting", () => {
  it("builds the patch from the scenario on the first frame", () => {
    const { stub, view } = makeRig();
    expect(view.state().proxyReady).toBe(false);
    expect(view.forceState().force).toBe(0);
    stub.deliver(1);
    const state = view.state();
    expect(state.proxyReady).toBe(true);
    expect(state.patches).toHaveLength(1);
    const patch = state.patches[0]!;
    // Horizontal samples approached from above: the normal faces +z and
    // the patch sits exactly on the sample plane.
    expect(patch.normal[0]).toBeCloseTo(0, 12);
    expect(patch.normal[1]).toBeCloseTo(0, 12);
    expect(patch.normal[2]).toBeCloseTo(1, 12);
    expect(patch.center[2]).toBeCloseTo(planeZ, 12);
    expect(patch.halfExtents).toEqual([0.4, 0.4]);
  });
});

describe("force bar against the recorded press", () => {
  it("renders spring-law force proportional to penetration, frame by frame",
    () => {
      const { session, view } = makeRig();
      const tips = telemetryTips();
      let contactFrames = 0;
      let freeFrames = 0;
      let lastForce = 0;
      for (const { raw, frame } of tips) {
        session.handleRaw(raw);
        if (frame.t > 11.6) {
          break;
        }
        const expectedPen = Math.max(planeZ - frame.tip[2], 0);
        const force = view.forceState();
        if (expectedPen > 0) {
          contactFrames += 1;
          expect(force.contact).toBe(true);
          expect(force.penetration).toBeCloseTo(expectedPen, 12);
          // Pure spring law: force = stiffness x penetration, exactly.
          expect(force.force).toBeCloseTo(stiffness * expectedPen, 12);
          // The rendered vector pushes back along the surface normal.
          expect(force.vector[2]).toBeCloseTo(force.force, 12);
          // Deeper press, larger bar: monotone through the descent.
          expect(force.force).toBeGreaterThanOrEqual(lastForce);
          lastForce = force.force;
        } else {
          freeFrames += 1;
          expect(force.contact).toBe(false);
          expect(force.force).toBe(0);
          expect(force.penetration).toBe(0);
          expect(force.vector).toEqual([0, 0, 0]);
        }
      }
      // The recording really exercises both regimes.
      expect(contactFrames).toBe(14);
      expect(freeFrames).toBeGreaterThan(80);
      expect(lastForce).toBeCloseTo(stiffness * 0.022003, 4);
    });

  it("reads zero once the tip returns to the free side", () => {
    const { session, view } = makeRig();
    const tips = telemetryTips();
    // Play everything: the press ends and the limb holds past the plate,
    // so the final frames still penetrate; check a pre-press frame too.
    session.handleRaw(tips[0]!.raw);
    expect(view.forceState().force).toBe(0);
    for (const { raw } of tips) {
      session.handleRaw(raw);
    }
    const final = view.forceState();
    expect(final.contact).toBe(true);
    expect(final.force).toBeCloseTo(
      stiffness * (planeZ - tips[tips.length - 1]!.frame.tip[2]), 12);
  });
});

describe("clutched command pump", () => {
  it("emits limb-master increments at 50 Hz while dragging", () => {
    const { stub, view } = makeRig();
    stub.deliver(1);
    view.clutchDown();
    let emitted = 0;
    for (let i = 0; i < 40; i += 1) {
      view.pointerMove(0, 0, -0.0005);
      if (view.pump(i * 5) !== null) {
        emitted += 1;
      }
    }
    // 200 ms of 5 ms UI ticks, one command per 20 ms: 50 Hz exactly.
    expect(emitted).toBe(10);
    expect(stub.commands).toHaveLength(10);
    // Motion after the last slot is still pending; the next slot flushes
    // it, so nothing is ever lost to the cadence limiter.
    expect(view.pump(200)).not.toBeNull();
    expect(stub.commands).toHaveLength(11);
    let total = 0;
    for (const envelope of stub.commands) {
      const body = envelope.body as {
        kind: string;
        limb: number;
        clutch: boolean;
        scale: number;
        increment: [number, number, number];
      };
      expect(body.kind).toBe("limb_master");
      expect(body.limb).toBe(0);
      expect(body.clutch).toBe(true);
      expect(body.scale).toBe(1);
      total += body.increment[2];
    }
    // Nothing lost, nothing duplicated: the increments add up to the drag.
    expect(total).toBeCloseTo(40 * -0.0005, 12);
  });

  it("stays silent between cadence slots", () => {
    const { stub, view } = makeRig();
    stub.deliver(1);
    view.clutchDown();
    view.pointerMove(0.001, 0, 0);
    expect(view.pump(100)).not.toBeNull();
    view.pointerMove(0.001, 0, 0);
    expect(view.pump(110)).toBeNull(); // only 10 ms since the last send
    expect(view.pump(119.9)).toBeNull();
    expect(view.pump(120)).not.toBeNull();
    expect(stub.commands).toHaveLength(2);
  });

  it("sends nothing with the clutch released", () => {
    const { stub, view } = makeRig();
    stub.deliver(1);
    view.pointerMove(0, 0.01, 0); // ignored: clutch up
    expect(view.pump(0)).toBeNull();
    view.clutchDown();
    expect(view.pump(20)).toBeNull(); // nothing accumulated while clutched
    view.pointerMove(0, 0.01, 0);
    view.clutchUp(); // releasing discards the un-flushed remainder
    expect(view.pump(40)).toBeNull();
    view.clutchDown();
    expect(view.pump(60)).toBeNull();
    expect(stub.commands).toHaveLength(0);
    expect(view.state().commandsSent).toBe(0);
  });

  it("does not emit empty increments", () => {
    const { stub, view } = makeRig();
    stub.deliver(1);
    view.clutchDown();
    view.pointerMove(0, 0, 0);
    expect(view.pump(0)).toBeNull();
    expect(stub.commands).toHaveLength(0);
  });

  it("forwards the configured master-to-limb scale", () => {
    const { stub, view } = makeRig({ scale: 0.25, limb: 0 });
    stub.deliver(1);
    view.clutchDown();
    view.pointerMove(0, 0, -0.001);
    view.pump(0);
    const body = stub.commands[0]!.body as { scale: number };
    expect(body.scale).toBe(0.25);
  });
});
