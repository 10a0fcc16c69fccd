/**
 * Manipulation view model: limb teleoperation with visual haptics.
 *
 * Pointer drags, while the clutch is held, accumulate a tip-frame increment
 * that `pump` flushes as limb-master commands at a fixed cadence (50 Hz by
 * default).  Releasing the clutch stops emission entirely -- motion with
 * the clutch up is ignored, like lifting a mouse.
 *
 * The force display is model-mediated: the console fits its own plane-patch
 * proxies from the scenario's depth samples and renders the spring-law
 * contact force of the telemetry tip against them, so the operator feels
 * (sees) contact with no round trip to the vehicle.
 */

import {
  fitPlanePatch,
  penetration,
  scale as vscale,
  type PlanePatch,
  type Vec3,
} from "./geometry.js";
import type { ConsoleScenario } from "./scenario.js";
import type { PendingCommand } from "./session.js";
import { ConsoleSession } from "./session.js";

export interface ForceState {
  /** Newtons of rendered proxy force (spring law). */
  force: number;
  /** Meters past the proxy surface. */
  penetration: number;
  contact: boolean;
  /** Force direction (the patch normal), zero vector when free. */
  vector: Vec3;
}

export interface ManipulationState {
  tip: Vec3 | null;
  direction: Vec3 | null;
  clutch: boolean;
  proxyReady: boolean;
  patches: PlanePatch[];
  force: ForceState;
  commandsSent: number;
}

export interface ManipulationOptions {
  limb?: number;
  rateHz?: number;
  /** Master-to-limb motion scale forwarded with each command. */
  scale?: number;
}

const FREE: ForceState = {
  force: 0, penetration: 0, contact: false, vector: [0, 0, 0],
};

export class ManipulationView {
  private readonly session: ConsoleSession;
  private readonly limb: number;
  private readonly periodMs: number;
  private readonly motionScale: number;
  private readonly stiffness: number;
  private readonly clusters: Vec3[][];
  private readonly halfExtents: [number, number][];
  private patches: PlanePatch[] = [];
  private proxyReady = false;
  private clutchHeld = false;
  private pendingIncrement: Vec3 = [0, 0, 0];
  private lastEmitMs: number | null = null;
  private emitted = 0;

  constructor(
    session: ConsoleSession,
    scenario: ConsoleScenario,
    options: ManipulationOptions = {},
  ) {
    this.session = session;
    this.limb = options.limb ?? 0;
    const rate = options.rateHz ?? 50;
    this.periodMs = 1000 / rate;
    this.motionScale = options.scale ?? 1.0;
    this.stiffness = scenario.environment.contactStiffness;
    this.clusters = scenario.environment.depthSampleClusters;
    this.halfExtents = scenario.environment.patchHalfExtents;
    // The proxy orients itself toward the side the tip approaches from, so
    // the patches are fitted on the first telemetry frame.
    session.onTelemetry((frame) => {
      if (!this.proxyReady) {
        const limb = frame.body.limbs[this.limb];
        if (limb !== undefined) {
          this.fitPatches(limb.tip);
        }
      }
    });
  }

  private fitPatches(approachFrom: Vec3): void {
    this.patches = this.clusters.map((cluster, i) =>
      fitPlanePatch(cluster, approachFrom, this.halfExtents[i] ?? [0.5, 0.5]));
    this.proxyReady = true;
  }

  clutchDown(): void {
    this.clutchHeld = true;
  }

  clutchUp(): void {
    this.clutchHeld = false;
    this.pendingIncrement = [0, 0, 0];
    this.lastEmitMs = null;
  }

  /** Pointer motion in meters of commanded tip travel (limb frame). */
  pointerMove(dx: number, dy: number, dz: number): void {
    if (!this.clutchHeld) {
      return;
    }
    this.pendingIncrement = [
      this.pendingIncrement[0] + dx,
      this.pendingIncrement[1] + dy,
      this.pendingIncrement[2] + dz,
    ];
  }

  /**
   * Command pump, called on a timer (or manually in tests).  At most one
   * limb-master command leaves per period, carrying whatever motion
   * accumulated since the last flush; nothing leaves with the clutch up.
   */
  pump(nowMs: number): PendingCommand | null {
    if (!this.clutchHeld) {
      return null;
    }
    const [dx, dy, dz] = this.pendingIncrement;
    if (dx === 0 && dy === 0 && dz === 0) {
      return null;
    }
    if (this.lastEmitMs !== null && nowMs - this.lastEmitMs < this.periodMs) {
      return null;
    }
    this.pendingIncrement = [0, 0, 0];
    this.lastEmitMs = nowMs;
    this.emitted += 1;
    return this.session.sendCommand({
      kind: "limb_master",
      id: this.session.nextCommandId("master"),
      limb: this.limb,
      increment: [dx, dy, dz],
      clutch: true,
      scale: this.motionScale,
    });
  }

  /** Spring-law force of the telemetry tip against the local proxy. */
  forceState(): ForceState {
    const frame = this.session.latest;
    if (frame === null || !this.proxyReady) {
      return FREE;
    }
    const limb = frame.body.limbs[this.limb];
    if (limb === undefined) {
      return FREE;
    }
    let best: ForceState = FREE;
    for (const patch of this.patches) {
      const pen = penetration(patch, limb.tip);
      const force = this.stiffness * pen;
      if (force > best.force) {
        best = {
          force,
          penetration: pen,
          contact: true,
          vector: vscale(patch.normal, force),
        };
      }
    }
    return best;
  }

  state(): ManipulationState {
    const frame = this.session.latest;
    const limb = frame === null ? undefined : frame.body.limbs[this.limb];
    return {
      tip: limb === undefined ? null : limb.tip,
      direction: limb === undefined ? null : limb.direction,
      clutch: this.clutchHeld,
      proxyReady: this.proxyReady,
      patches: this.patches,
      force: this.forceState(),
      commandsSent: this.emitted,
    };
  }
}
