/**
 * Wire schema for the operator gateway: typed message unions, a total
 * validating decoder for everything the console receives, and a canonical
 * encoder for everything it sends.
 *
 * The console never renders a frame that did not pass `decodeDownlink`;
 * malformed input raises `SchemaError` with a JSONPath-style location so
 * link problems are diagnosable instead of silently mis-rendered.
 */

export class SchemaError extends Error {
  readonly path: string;

  constructor(path: string, detail: string) {
    super(`schema-error ${path}: ${detail}`);
    this.name = "SchemaError";
    this.path = path;
  }
}

// ---------------------------------------------------------------- mode names

export const OP_MODES = ["EXP", "INT"] as const;
export const NAV_MODES = ["AUTNAV", "MANCON", "SAUTPOS"] as const;
export const LINK_MODES = ["TET", "NOWIRE"] as const;

export type OpMode = (typeof OP_MODES)[number];
export type NavMode = (typeof NAV_MODES)[number];
export type LinkMode = (typeof LINK_MODES)[number];

export interface ModeName {
  op: OpMode;
  nav: NavMode;
  link: LinkMode;
}

/** Render a mode triplet the way the vehicle reports it, e.g. "INT/MANCON/TET". */
export function describeMode(mode: ModeName): string {
  return `${mode.op}/${mode.nav}/${mode.link}`;
}

export function sameMode(a: ModeName, b: ModeName): boolean {
  return a.op === b.op && a.nav === b.nav && a.link === b.link;
}

// ------------------------------------------------------------ telemetry body

export interface VehicleTelemetry {
  x: number;
  y: number;
  z: number;
  psi: number;
  u: number;
  v: number;
  r: number;
  w: number;
}

export interface NavTelemetry {
  x: number;
  y: number;
  psi: number;
  /** Row-major 3x3 pose covariance. */
  cov: number[];
}

export interface LimbTelemetry {
  id: string;
  tip: [number, number, number];
  direction: [number, number, number];
  tendon_dl: [number, number, number, number];
}

export interface PowerTelemetry {
  source: "umbilical" | "battery";
  soc_wh: number;
  bus_v: number;
  total_w: number;
  mean_w: number;
  /** Hours remaining at the rolling mean load; null while externally powered. */
  endurance_h: number | null;
}

export interface LinkTelemetry {
  kind: "umbilical" | "vlc" | "lte_wifi";
  available: boolean;
  bandwidth_kbps: number;
  latency_ms: number;
}

export interface GuidanceTelemetry {
  active_waypoint: number;
  cross_track_error: number;
  done: boolean;
}

export interface TelemetryBody {
  vehicle: VehicleTelemetry;
  nav: NavTelemetry;
  mode: ModeName;
  limbs: LimbTelemetry[];
  power: PowerTelemetry;
  link: LinkTelemetry;
  faults: string[];
  guidance: GuidanceTelemetry;
}

// ----------------------------------------------------------------- commands

export interface ModeTransitionCommand {
  kind: "mode_transition";
  id: string;
  target: ModeName;
}

export interface WaypointUploadCommand {
  kind: "waypoint_upload";
  id: string;
  waypoints: [number, number][];
  acceptance_radius?: number;
  cruise_speed?: number;
}

export interface LimbMasterCommand {
  kind: "limb_master";
  id: string;
  limb: number;
  increment: [number, number, number];
  clutch: boolean;
  scale?: number;
}

export interface FinOverrideCommand {
  kind: "fin_override";
  id: string;
  fins: {
    id: string;
    swivel: number;
    mode: "SW" | "TW";
    amplitude: number;
    frequency: number;
    phase?: number;
  }[];
}

export interface JetFireCommand {
  kind: "jet_fire";
  id: string;
  pump_rate: number;
  valve_open: boolean;
  nozzle_angle: number;
}

export interface EmergencyStopCommand {
  kind: "emergency_stop";
  id: string;
}

export type CommandBody =
  | ModeTransitionCommand
  | WaypointUploadCommand
  | LimbMasterCommand
  | FinOverrideCommand
  | JetFireCommand
  | EmergencyStopCommand;

// ---------------------------------------------------------------- envelopes

export interface AckBody {
  command_id: string;
  status: "accepted" | "rejected";
  /** Verbatim machine-readable reason; present exactly when rejected. */
  reason?: string;
}

export interface TelemetryMessage {
  v: 1;
  type: "telemetry";
  seq: number;
  t: number;
  body: TelemetryBody;
}

export interface AckMessage {
  v: 1;
  type: "ack";
  seq: number;
  t: number;
  body: AckBody;
}

export interface CommandMessage {
  v: 1;
  type: "command";
  seq: number;
  t: number;
  body: CommandBody;
}

export type DownlinkMessage = TelemetryMessage | AckMessage;

// ------------------------------------------------------------- check helpers

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function expectRecord(value: unknown, path: string): Record<string, unknown> {
  if (!isRecord(value)) {
    throw new SchemaError(path, "must be an object");
  }
  return value;
}

function expectKeys(
  obj: Record<string, unknown>,
  path: string,
  required: string[],
  optional: string[] = [],
): void {
  for (const key of required) {
    if (!(key in obj)) {
      throw new SchemaError(`${path}.${key}`, "missing required field");
    }
  }
  for (const key of Object.keys(obj)) {
    if (!required.includes(key) && !optional.includes(key)) {
      throw new SchemaError(`${path}.${key}`, "unknown field");
    }
  }
}

function expectNumber(value: unknown, path: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new SchemaError(path, "must be a finite number");
  }
  return value;
}

function expectInt(value: unknown, path: string, minimum?: number): number {
  const num = expectNumber(value, path);
  if (!Number.isInteger(num)) {
    throw new SchemaError(path, "must be an integer");
  }
  if (minimum !== undefined && num < minimum) {
    throw new SchemaError(path, `must be >= ${minimum}`);
  }
  return num;
}

function expectBool(value: unknown, path: string): boolean {
  if (typeof value !== "boolean") {
    throw new SchemaError(path, "must be a boolean");
  }
  return value;
}

function expectString(value: unknown, path: string): string {
  if (typeof value !== "string") {
    throw new SchemaError(path, "must be a string");
  }
  return value;
}

function expectChoice<T extends string>(
  value: unknown,
  path: string,
  choices: readonly T[],
): T {
  const str = expectString(value, path);
  if (!(choices as readonly string[]).includes(str)) {
    throw new SchemaError(path, `must be one of ${choices.join(", ")}`);
  }
  return str as T;
}

function expectVector<N extends number>(
  value: unknown,
  path: string,
  length: N,
): number[] {
  if (!Array.isArray(value) || value.length !== length) {
    throw new SchemaError(path, `must be a list of ${length} numbers`);
  }
  return value.map((item, i) => expectNumber(item, `${path}[${i}]`));
}

// ------------------------------------------------------------------ decoding

function decodeModeName(value: unknown, path: string): ModeName {
  const obj = expectRecord(value, path);
  expectKeys(obj, path, ["op", "nav", "link"]);
  return {
    op: expectChoice(obj.op, `${path}.op`, OP_MODES),
    nav: expectChoice(obj.nav, `${path}.nav`, NAV_MODES),
    link: expectChoice(obj.link, `${path}.link`, LINK_MODES),
  };
}

function decodeTelemetryBody(value: unknown, path: string): TelemetryBody {
  const obj = expectRecord(value, path);
  expectKeys(obj, path, [
    "vehicle", "nav", "mode", "limbs", "power", "link", "faults", "guidance",
  ]);

  const vehicleObj = expectRecord(obj.vehicle, `${path}.vehicle`);
  expectKeys(vehicleObj, `${path}.vehicle`,
    ["x", "y", "z", "psi", "u", "v", "r", "w"]);
  const vehicle: VehicleTelemetry = {
    x: expectNumber(vehicleObj.x, `${path}.vehicle.x`),
    y: expectNumber(vehicleObj.y, `${path}.vehicle.y`),
    z: expectNumber(vehicleObj.z, `${path}.vehicle.z`),
    psi: expectNumber(vehicleObj.psi, `${path}.vehicle.psi`),
    u: expectNumber(vehicleObj.u, `${path}.vehicle.u`),
    v: expectNumber(vehicleObj.v, `${path}.vehicle.v`),
    r: expectNumber(vehicleObj.r, `${path}.vehicle.r`),
    w: expectNumber(vehicleObj.w, `${path}.vehicle.w`),
  };

  const navObj = expectRecord(obj.nav, `${path}.nav`);
  expectKeys(navObj, `${path}.nav`, ["x", "y", "psi", "cov"]);
  const nav: NavTelemetry = {
    x: expectNumber(navObj.x, `${path}.nav.x`),
    y: expectNumber(navObj.y, `${path}.nav.y`),
    psi: expectNumber(navObj.psi, `${path}.nav.psi`),
    cov: expectVector(navObj.cov, `${path}.nav.cov`, 9),
  };

  if (!Array.isArray(obj.limbs)) {
    throw new SchemaError(`${path}.limbs`, "must be a list");
  }
  const limbs: LimbTelemetry[] = obj.limbs.map((item, i) => {
    const lpath = `${path}.limbs[${i}]`;
    const lobj = expectRecord(item, lpath);
    expectKeys(lobj, lpath, ["id", "tip", "direction", "tendon_dl"]);
    return {
      id: expectString(lobj.id, `${lpath}.id`),
      tip: expectVector(lobj.tip, `${lpath}.tip`, 3) as [number, number, number],
      direction: expectVector(lobj.direction, `${lpath}.direction`, 3) as
        [number, number, number],
      tendon_dl: expectVector(lobj.tendon_dl, `${lpath}.tendon_dl`, 4) as
        [number, number, number, number],
    };
  });

  const powerObj = expectRecord(obj.power, `${path}.power`);
  expectKeys(powerObj, `${path}.power`,
    ["source", "soc_wh", "bus_v", "total_w", "mean_w", "endurance_h"]);
  const endurance = powerObj.endurance_h;
  const power: PowerTelemetry = {
    source: expectChoice(powerObj.source, `${path}.power.source`,
      ["umbilical", "battery"] as const),
    soc_wh: expectNumber(powerObj.soc_wh, `${path}.power.soc_wh`),
    bus_v: expectNumber(powerObj.bus_v, `${path}.power.bus_v`),
    total_w: expectNumber(powerObj.total_w, `${path}.power.total_w`),
    mean_w: expectNumber(powerObj.mean_w, `${path}.power.mean_w`),
    endurance_h: endurance === null
      ? null
      : expectNumber(endurance, `${path}.power.endurance_h`),
  };

  const linkObj = expectRecord(obj.link, `${path}.link`);
  expectKeys(linkObj, `${path}.link`,
    ["kind", "available", "bandwidth_kbps", "latency_ms"]);
  const link: LinkTelemetry = {
    kind: expectChoice(linkObj.kind, `${path}.link.kind`,
      ["umbilical", "vlc", "lte_wifi"] as const),
    available: expectBool(linkObj.available, `${path}.link.available`),
    bandwidth_kbps: expectNumber(linkObj.bandwidth_kbps,
      `${path}.link.bandwidth_kbps`),
    latency_ms: expectNumber(linkObj.latency_ms, `${path}.link.latency_ms`),
  };

  if (!Array.isArray(obj.faults)) {
    throw new SchemaError(`${path}.faults`, "must be a list");
  }
  const faults = obj.faults.map((item, i) =>
    expectString(item, `${path}.faults[${i}]`));

  const guidObj = expectRecord(obj.guidance, `${path}.guidance`);
  expectKeys(guidObj, `${path}.guidance`,
    ["active_waypoint", "cross_track_error", "done"]);
  const guidance: GuidanceTelemetry = {
    active_waypoint: expectInt(guidObj.active_waypoint,
      `${path}.guidance.active_waypoint`, 0),
    cross_track_error: expectNumber(guidObj.cross_track_error,
      `${path}.guidance.cross_track_error`),
    done: expectBool(guidObj.done, `${path}.guidance.done`),
  };

  return {
    vehicle, nav, mode: decodeModeName(obj.mode, `${path}.mode`),
    limbs, power, link, faults, guidance,
  };
}

function decodeAckBody(value: unknown, path: string): AckBody {
  const obj = expectRecord(value, path);
  expectKeys(obj, path, ["command_id", "status"], ["reason"]);
  const status = expectChoice(obj.status, `${path}.status`,
    ["accepted", "rejected"] as const);
  const ack: AckBody = {
    command_id: expectString(obj.command_id, `${path}.command_id`),
    status,
  };
  if (status === "rejected") {
    if (!("reason" in obj)) {
      throw new SchemaError(`${path}.reason`,
        "missing required field for rejected status");
    }
    ack.reason = expectString(obj.reason, `${path}.reason`);
  } else if ("reason" in obj) {
    ack.reason = expectString(obj.reason, `${path}.reason`);
  }
  return ack;
}

/**
 * Parse and validate one message off the gateway WebSocket.  Returns a typed
 * telemetry or ack message; anything else -- unparseable text, wrong version,
 * uplink-only types, structural violations -- raises `SchemaError`.
 */
export function decodeDownlink(raw: string): DownlinkMessage {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    throw new SchemaError("$", "input is not valid JSON");
  }
  const obj = expectRecord(parsed, "$");
  expectKeys(obj, "$", ["v", "type", "seq", "t", "body"]);
  if (obj.v !== 1) {
    throw new SchemaError("$.v", "unsupported protocol version");
  }
  const type = expectChoice(obj.type, "$.type",
    ["telemetry", "ack"] as const);
  const seq = expectInt(obj.seq, "$.seq", 0);
  const t = expectNumber(obj.t, "$.t");
  if (type === "telemetry") {
    return {
      v: 1, type, seq, t, body: decodeTelemetryBody(obj.body, "$.body"),
    };
  }
  return { v: 1, type, seq, t, body: decodeAckBody(obj.body, "$.body") };
}

// ------------------------------------------------------------------ encoding

function canonicalize(value: unknown, path: string): unknown {
  if (value === null || typeof value === "boolean" ||
      typeof value === "string") {
    return value;
  }
  if (typeof value === "number") {
    if (!Number.isFinite(value)) {
      throw new SchemaError(path, "must be a finite number");
    }
    return Object.is(value, -0) ? 0 : value;
  }
  if (Array.isArray(value)) {
    return value.map((item, i) => canonicalize(item, `${path}[${i}]`));
  }
  if (isRecord(value)) {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value).sort()) {
      out[key] = canonicalize(value[key], `${path}.${key}`);
    }
    return out;
  }
  throw new SchemaError(path, "value is not JSON-serializable");
}

/**
 * Serialize a command envelope in the wire's canonical form: keys sorted at
 * every level, no whitespace, negative zero flattened, non-finite rejected.
 */
export function encodeCommand(message: CommandMessage): string {
  return JSON.stringify(canonicalize(message, "$"));
}

export function makeCommand(
  seq: number,
  t: number,
  body: CommandBody,
): CommandMessage {
  return { v: 1, type: "command", seq, t, body };
}
