/**
 * Typed view of the scenario snapshot served by `GET /scenario`.  The
 * gateway has already validated the document; this module just pulls out
 * the parts the console renders and fails loudly if they are not shaped
 * as published.
 */

import type { Vec3 } from "./geometry.js";

export interface ScenarioLandmark {
  id: number;
  x: number;
  y: number;
}

export interface ScenarioPlan {
  waypoints: [number, number][];
  acceptanceRadius: number;
  cruiseSpeed: number;
}

export interface ScenarioEnvironment {
  contactStiffness: number;
  /** One cluster of surface samples per proxy patch, in the limb frame. */
  depthSampleClusters: Vec3[][];
  /** Patch footprint half extents, borrowed from the configured planes. */
  patchHalfExtents: [number, number][];
}

export interface ConsoleScenario {
  name: string;
  duration: number;
  dt: number;
  plan: ScenarioPlan;
  landmarks: ScenarioLandmark[];
  environment: ScenarioEnvironment;
  baseLoads: Record<string, number>;
  telemetryEveryTicks: number;
}

function asRecord(value: unknown, what: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new Error(`scenario ${what} must be an object`);
  }
  return value as Record<string, unknown>;
}

function asNumber(value: unknown, what: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new Error(`scenario ${what} must be a finite number`);
  }
  return value;
}

function asPair(value: unknown, what: string): [number, number] {
  if (!Array.isArray(value) || value.length !== 2) {
    throw new Error(`scenario ${what} must be a pair`);
  }
  return [asNumber(value[0], what), asNumber(value[1], what)];
}

function asVec3(value: unknown, what: string): Vec3 {
  if (!Array.isArray(value) || value.length !== 3) {
    throw new Error(`scenario ${what} must have 3 components`);
  }
  return [
    asNumber(value[0], what),
    asNumber(value[1], what),
    asNumber(value[2], what),
  ];
}

export function parseScenario(snapshot: unknown): ConsoleScenario {
  const doc = asRecord(snapshot, "document");
  const plan = asRecord(doc.plan, "plan");
  const waypointsRaw = plan.waypoints;
  if (!Array.isArray(waypointsRaw)) {
    throw new Error("scenario plan.waypoints must be a list");
  }

  const landmarksRaw = Array.isArray(doc.landmarks) ? doc.landmarks : [];
  const env = asRecord(doc.environment ?? {}, "environment");
  const clustersRaw = Array.isArray(env.depth_sample_clusters)
    ? env.depth_sample_clusters
    : [];
  const planesRaw = Array.isArray(env.contact_planes) ? env.contact_planes : [];
  const rates = asRecord(doc.rates ?? { telemetry: 10 }, "rates");

  return {
    name: String(doc.name ?? "scenario"),
    duration: asNumber(doc.duration, "duration"),
    dt: asNumber(doc.dt, "dt"),
    plan: {
      waypoints: waypointsRaw.map((wp, i) => asPair(wp, `plan.waypoints[${i}]`)),
      acceptanceRadius: asNumber(plan.acceptance_radius ?? 1.0,
        "plan.acceptance_radius"),
      cruiseSpeed: asNumber(plan.cruise_speed ?? 0.8, "plan.cruise_speed"),
    },
    landmarks: landmarksRaw.map((lm, i) => {
      const obj = asRecord(lm, `landmarks[${i}]`);
      return {
        id: asNumber(obj.id, `landmarks[${i}].id`),
        x: asNumber(obj.x, `landmarks[${i}].x`),
        y: asNumber(obj.y, `landmarks[${i}].y`),
      };
    }),
    environment: {
      contactStiffness: asNumber(env.contact_stiffness ?? 0,
        "environment.contact_stiffness"),
      depthSampleClusters: clustersRaw.map((cluster, i) => {
        if (!Array.isArray(cluster)) {
          throw new Error(`scenario environment.depth_sample_clusters[${i}]` +
            " must be a list");
        }
        return cluster.map((pt, j) =>
          asVec3(pt, `environment.depth_sample_clusters[${i}][${j}]`));
      }),
      patchHalfExtents: planesRaw.map((plane, i) =>
        asPair(asRecord(plane, `environment.contact_planes[${i}]`).half_extents,
          `environment.contact_planes[${i}].half_extents`)),
    },
    baseLoads: Object.fromEntries(
      Object.entries(asRecord(doc.base_loads ?? {}, "base_loads"))
        .map(([key, value]) => [key, asNumber(value, `base_loads.${key}`)]),
    ),
    telemetryEveryTicks: asNumber(rates.telemetry ?? 10, "rates.telemetry"),
  };
}
