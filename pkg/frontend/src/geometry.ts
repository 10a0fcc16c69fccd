/**
 * Small geometry kit for the console: position-covariance ellipses for the
 * map, and plane-patch proxies for the manipulation view's visual haptics.
 */

export interface Ellipse {
  /** Semi-axis along the major direction, already scaled by `k`. */
  semiMajor: number;
  semiMinor: number;
  /** Major-axis direction, radians from the +x axis toward +y. */
  angle: number;
}

/**
 * Confidence ellipse of the position part of a row-major 3x3 pose
 * covariance.  `k` scales the one-sigma axes (k=2 draws the ~86% region of
 * a 2-D Gaussian; the default matches the map's drawing convention).
 */
export function covarianceEllipse(cov: number[], k = 2): Ellipse {
  if (cov.length !== 9) {
    throw new Error(`pose covariance must have 9 entries, got ${cov.length}`);
  }
  const a = cov[0]!;
  const b = (cov[1]! + cov[3]!) / 2; // symmetrize against rounding
  const d = cov[4]!;
  const half = (a + d) / 2;
  const diff = (a - d) / 2;
  const radius = Math.hypot(diff, b);
  const major = Math.max(half + radius, 0);
  const minor = Math.max(half - radius, 0);
  return {
    semiMajor: k * Math.sqrt(major),
    semiMinor: k * Math.sqrt(minor),
    angle: 0.5 * Math.atan2(2 * b, a - d),
  };
}

// ----------------------------------------------------------------- 3-vectors

export type Vec3 = [number, number, number];

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function norm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function scale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  if (n === 0) {
    throw new Error("cannot normalize a zero vector");
  }
  return scale(a, 1 / n);
}

// -------------------------------------------------------------- plane patch

export interface PlanePatch {
  /** A point on the plane (the sample centroid). */
  center: Vec3;
  /** Unit normal pointing toward the free (approach) side. */
  normal: Vec3;
  /** In-plane orthonormal axes spanning the patch. */
  uAxis: Vec3;
  vAxis: Vec3;
  /** Patch half extents along uAxis/vAxis. */
  halfExtents: [number, number];
}

/**
 * Fit a plane through a cluster of surface samples.  The normal is chosen to
 * face `approachFrom` (the side the limb tip comes from), matching how the
 * vehicle's own proxy is oriented, so penetration is positive past the
 * surface.  Samples are expected near-coplanar; the fit averages the cross
 * products of consecutive centroid-relative spans, which is exact on
 * noiseless clusters.
 */
export function fitPlanePatch(
  samples: Vec3[],
  approachFrom: Vec3,
  halfExtents: [number, number],
): PlanePatch {
  if (samples.length < 3) {
    throw new Error(`plane fit needs at least 3 samples, got ${samples.length}`);
  }
  const centroid: Vec3 = [0, 0, 0];
  for (const p of samples) {
    centroid[0] += p[0] / samples.length;
    centroid[1] += p[1] / samples.length;
    centroid[2] += p[2] / samples.length;
  }
  let accum: Vec3 = [0, 0, 0];
  let reference: Vec3 | null = null;
  for (let i = 0; i < samples.length; i += 1) {
    const a = sub(samples[i]!, centroid);
    const b = sub(samples[(i + 1) % samples.length]!, centroid);
    let c = cross(a, b);
    if (norm(c) === 0) {
      continue;
    }
    if (reference === null) {
      reference = c;
    } else if (dot(c, reference) < 0) {
      c = scale(c, -1); // consistent winding before averaging
    }
    accum = [accum[0] + c[0], accum[1] + c[1], accum[2] + c[2]];
  }
  if (norm(accum) === 0) {
    throw new Error("samples are collinear; no unique plane");
  }
  let normal = normalize(accum);
  if (dot(sub(approachFrom, centroid), normal) < 0) {
    normal = scale(normal, -1);
  }
  // Stable in-plane basis: prefer the world axis least aligned with normal.
  const seed: Vec3 =
    Math.abs(normal[2]) < 0.9 ? [0, 0, 1] : [1, 0, 0];
  const uAxis = normalize(cross(seed, normal));
  const vAxis = cross(normal, uAxis);
  return { center: centroid, normal, uAxis, vAxis, halfExtents };
}

/**
 * Depth of `point` past the patch surface against the normal, in meters.
 * Zero when on the free side or outside the patch footprint.
 */
export function penetration(patch: PlanePatch, point: Vec3): number {
  const rel = sub(point, patch.center);
  const depth = -dot(rel, patch.normal);
  if (depth <= 0) {
    return 0;
  }
  const du = Math.abs(dot(rel, patch.uAxis));
  const dv = Math.abs(dot(rel, patch.vAxis));
  if (du > patch.halfExtents[0] || dv > patch.halfExtents[1]) {
    return 0;
  }
  return depth;
}
