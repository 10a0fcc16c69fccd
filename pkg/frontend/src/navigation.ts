/**
 * Navigation view model: everything the map renders and the waypoint
 * editing workflow.  Positions follow the vehicle's convention -- x north,
 * y east, heading psi measured from north toward east -- so a marker for
 * pose (10, 5, psi=pi/2) sits at north 10 m / east 5 m pointing due east.
 *
 * The view never fabricates state: the vehicle marker and estimate ellipse
 * come from the latest telemetry frame, the active plan only changes once
 * the vehicle acknowledges an upload, and a dropped connection freezes the
 * map behind a staleness banner.
 */

import { covarianceEllipse, type Ellipse } from "./geometry.js";
import type { ConsoleScenario, ScenarioLandmark } from "./scenario.js";
import type { PendingCommand } from "./session.js";
import { ConsoleSession } from "./session.js";

export interface VehicleMarker {
  north: number;
  east: number;
  heading: number;
}

export interface EstimateMarker extends VehicleMarker {
  ellipse: Ellipse;
}

export interface MapState {
  connected: boolean;
  /** Banner text when the view is read-only/stale, else null. */
  banner: string | null;
  vehicle: VehicleMarker | null;
  estimate: EstimateMarker | null;
  landmarks: ScenarioLandmark[];
  /** Plan the vehicle is known to hold (last acknowledged upload or initial). */
  activePlan: [number, number][];
  /** Local working copy being edited, shown as a dashed preview. */
  draftPlan: [number, number][];
  draftDirty: boolean;
  activeWaypoint: number | null;
  planDone: boolean;
}

export class NavigationView {
  private readonly session: ConsoleSession;
  private readonly landmarks: ScenarioLandmark[];
  private readonly acceptanceRadius: number;
  private readonly cruiseSpeed: number;
  private activePlan: [number, number][];
  private draft: [number, number][];
  private dirty = false;
  private upload: PendingCommand | null = null;

  constructor(session: ConsoleSession, scenario: ConsoleScenario) {
    this.session = session;
    this.landmarks = scenario.landmarks;
    this.acceptanceRadius = scenario.plan.acceptanceRadius;
    this.cruiseSpeed = scenario.plan.cruiseSpeed;
    this.activePlan = scenario.plan.waypoints.map((wp) => [...wp]);
    this.draft = scenario.plan.waypoints.map((wp) => [...wp]);
    session.onAck((ack) => {
      if (this.upload !== null && ack.body.command_id === this.upload.id &&
          ack.body.status === "accepted" &&
          this.upload.body.kind === "waypoint_upload") {
        this.activePlan = this.upload.body.waypoints.map((wp) => [...wp]);
        this.upload = null;
      }
    });
  }

  /** Click-to-add: appends a waypoint to the draft plan. */
  addWaypoint(north: number, east: number): void {
    this.draft.push([north, east]);
    this.dirty = true;
  }

  /** Drag: moves an existing draft waypoint. */
  dragWaypoint(index: number, north: number, east: number): void {
    const wp = this.draft[index];
    if (wp === undefined) {
      throw new Error(`no waypoint ${index} in a ${this.draft.length}-point draft`);
    }
    wp[0] = north;
    wp[1] = east;
    this.dirty = true;
  }

  removeWaypoint(index: number): void {
    if (index < 0 || index >= this.draft.length) {
      throw new Error(`no waypoint ${index} in a ${this.draft.length}-point draft`);
    }
    this.draft.splice(index, 1);
    this.dirty = true;
  }

  /** Discard edits: the draft snaps back to the active plan. */
  resetDraft(): void {
    this.draft = this.activePlan.map((wp) => [...wp]);
    this.dirty = false;
  }

  /** Send the edited plan to the vehicle; resolves via the ack stream. */
  uploadDraft(): PendingCommand {
    if (this.draft.length === 0) {
      throw new Error("cannot upload an empty plan");
    }
    const pending = this.session.sendCommand({
      kind: "waypoint_upload",
      id: this.session.nextCommandId("route"),
      waypoints: this.draft.map((wp) => [...wp] as [number, number]),
      acceptance_radius: this.acceptanceRadius,
      cruise_speed: this.cruiseSpeed,
    });
    this.upload = pending;
    this.dirty = false;
    return pending;
  }

  state(): MapState {
    const frame = this.session.latest;
    const connected = this.session.connection === "connected";
    let banner: string | null = null;
    if (!connected) {
      banner = frame === null
        ? "disconnected – no data received"
        : `disconnected – showing last frame (t=${frame.t.toFixed(1)} s)`;
    }
    return {
      connected,
      banner,
      vehicle: frame === null ? null : {
        north: frame.body.vehicle.x,
        east: frame.body.vehicle.y,
        heading: frame.body.vehicle.psi,
      },
      estimate: frame === null ? null : {
        north: frame.body.nav.x,
        east: frame.body.nav.y,
        heading: frame.body.nav.psi,
        ellipse: covarianceEllipse(frame.body.nav.cov),
      },
      landmarks: this.landmarks,
      activePlan: this.activePlan.map((wp) => [...wp]),
      draftPlan: this.draft.map((wp) => [...wp]),
      draftDirty: this.dirty,
      activeWaypoint: frame === null ? null : frame.body.guidance.active_waypoint,
      planDone: frame === null ? false : frame.body.guidance.done,
    };
  }
}
