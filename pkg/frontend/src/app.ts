/**
 * Browser entry point.  Everything stateful lives in the view models
 * (session, navigation, modes, manipulation, dashboards); this file only
 * opens the WebSocket, routes DOM events in, and paints their state out on
 * an animation-frame loop.
 */

import { ConsoleSession, type Transport } from "./session.js";
import { parseScenario, type ConsoleScenario } from "./scenario.js";
import { NavigationView } from "./navigation.js";
import { ModePanel } from "./modes.js";
import { ManipulationView } from "./manipulation.js";
import { Dashboards } from "./dashboards.js";
import {
  OP_MODES,
  NAV_MODES,
  LINK_MODES,
  describeMode,
  type ModeName,
} from "./messages.js";

const PUMP_MS = 20; // teleop command cadence (50 Hz)
const DRAG_METERS_PER_PIXEL = 0.002; // teleop pad sensitivity

interface Dom {
  canvas: HTMLCanvasElement;
  banner: HTMLElement;
  modeLabel: HTMLElement;
  modeStatus: HTMLElement;
  rejection: HTMLElement;
  faults: HTMLElement;
  opSelect: HTMLSelectElement;
  navSelect: HTMLSelectElement;
  linkSelect: HTMLSelectElement;
  applyMode: HTMLButtonElement;
  uploadRoute: HTMLButtonElement;
  clearDraft: HTMLButtonElement;
  teleopPad: HTMLElement;
  forceFill: HTMLElement;
  forceLabel: HTMLElement;
  clutchLabel: HTMLElement;
  power: HTMLElement;
  link: HTMLElement;
  gapDot: HTMLElement;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing #${id} in the page`);
  }
  return node as T;
}

function gatewayBase(): string {
  const param = new URLSearchParams(window.location.search).get("gateway");
  return param ?? window.location.host;
}

async function fetchScenario(base: string): Promise<ConsoleScenario> {
  const response = await fetch(`http://${base}/scenario`);
  if (!response.ok) {
    throw new Error(`scenario fetch failed: HTTP ${response.status}`);
  }
  return parseScenario(await response.json());
}

export async function startConsole(): Promise<void> {
  const dom: Dom = {
    canvas: el("map"),
    banner: el("banner"),
    modeLabel: el("mode-label"),
    modeStatus: el("mode-status"),
    rejection: el("rejection"),
    faults: el("faults"),
    opSelect: el("op-select"),
    navSelect: el("nav-select"),
    linkSelect: el("link-select"),
    applyMode: el("apply-mode"),
    uploadRoute: el("upload-route"),
    clearDraft: el("clear-draft"),
    teleopPad: el("teleop-pad"),
    forceFill: el("force-fill"),
    forceLabel: el("force-label"),
    clutchLabel: el("clutch-label"),
    power: el("power"),
    link: el("link"),
    gapDot: el("gap-dot"),
  };

  const base = gatewayBase();
  const scenario = await fetchScenario(base);
  const session = new ConsoleSession();
  const map = new NavigationView(session, scenario);
  const modes = new ModePanel(session);
  const teleop = new ManipulationView(session, scenario);
  const boards = new Dashboards(session, scenario);

  connect(base, session);
  fillModeSelects(dom);
  wireMap(dom, map);
  wireModes(dom, modes);
  wireTeleop(dom, teleop);

  window.setInterval(() => teleop.pump(performance.now()), PUMP_MS);
  window.setInterval(() => session.expirePending(), 1000);

  const paint = (): void => {
    drawMap(dom.canvas, map, scenario);
    paintPanels(dom, session, map, modes, teleop, boards);
    window.requestAnimationFrame(paint);
  };
  window.requestAnimationFrame(paint);
}

function connect(base: string, session: ConsoleSession): void {
  const ws = new WebSocket(`ws://${base}/ws`);
  const transport: Transport = {
    send: (text) => ws.send(text),
    close: () => ws.close(),
  };
  ws.onopen = () => session.attach(transport);
  ws.onmessage = (event) => {
    if (typeof event.data === "string") {
      session.handleRaw(event.data);
    }
  };
  ws.onclose = () => {
    session.handleClose();
    // The gateway may just be restarting; retry at a gentle pace.
    window.setTimeout(() => connect(base, session), 2000);
  };
}

// ------------------------------------------------------------- mode panel

function fillModeSelects(dom: Dom): void {
  const fill = (select: HTMLSelectElement, values: readonly string[]): void => {
    for (const value of values) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      select.appendChild(option);
    }
  };
  fill(dom.opSelect, OP_MODES);
  fill(dom.navSelect, NAV_MODES);
  fill(dom.linkSelect, LINK_MODES);
}

function wireModes(dom: Dom, modes: ModePanel): void {
  dom.applyMode.onclick = () => {
    const target = {
      op: dom.opSelect.value,
      nav: dom.navSelect.value,
      link: dom.linkSelect.value,
    } as ModeName;
    try {
      modes.requestTransition(target);
    } catch (err) {
      dom.modeStatus.textContent = String(err);
    }
  };
  dom.rejection.onclick = () => modes.dismissRejection();
}

// ------------------------------------------------------------------- map

const MAP_SCALE = 28; // pixels per meter
const MAP_MARGIN = 40;

/** World (north, east) to canvas pixels; north-up, east-right. */
function toPixels(
  canvas: HTMLCanvasElement,
  north: number,
  east: number,
): [number, number] {
  return [MAP_MARGIN + east * MAP_SCALE, canvas.height - MAP_MARGIN - north * MAP_SCALE];
}

function fromPixels(
  canvas: HTMLCanvasElement,
  px: number,
  py: number,
): [number, number] {
  return [
    (canvas.height - MAP_MARGIN - py) / MAP_SCALE,
    (px - MAP_MARGIN) / MAP_SCALE,
  ];
}

function wireMap(dom: Dom, map: NavigationView): void {
  let dragIndex: number | null = null;
  const canvas = dom.canvas;

  const hitWaypoint = (px: number, py: number): number | null => {
    const draft = map.state().draftPlan;
    for (let i = 0; i < draft.length; i += 1) {
      const [wx, wy] = toPixels(canvas, draft[i]![0], draft[i]![1]);
      if (Math.hypot(px - wx, py - wy) < 10) {
        return i;
      }
    }
    return null;
  };

  canvas.onmousedown = (event) => {
    const rect = canvas.getBoundingClientRect();
    const px = event.clientX - rect.left;
    const py = event.clientY - rect.top;
    dragIndex = hitWaypoint(px, py);
    if (dragIndex === null && event.shiftKey) {
      const [north, east] = fromPixels(canvas, px, py);
      map.addWaypoint(north, east);
    }
  };
  canvas.onmousemove = (event) => {
    if (dragIndex === null) {
      return;
    }
    const rect = canvas.getBoundingClientRect();
    const [north, east] = fromPixels(
      canvas, event.clientX - rect.left, event.clientY - rect.top);
    map.dragWaypoint(dragIndex, north, east);
  };
  canvas.onmouseup = () => {
    dragIndex = null;
  };

  dom.uploadRoute.onclick = () => {
    try {
      map.uploadDraft();
    } catch (err) {
      dom.banner.textContent = String(err);
    }
  };
  dom.clearDraft.onclick = () => map.resetDraft();
}

function drawMap(
  canvas: HTMLCanvasElement,
  map: NavigationView,
  scenario: ConsoleScenario,
): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  const state = map.state();
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#0b1020";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  // Landmarks: diamonds with ids.
  ctx.fillStyle = "#888";
  ctx.font = "11px sans-serif";
  for (const mark of state.landmarks) {
    const [px, py] = toPixels(canvas, mark.x, mark.y);
    ctx.beginPath();
    ctx.moveTo(px, py - 5);
    ctx.lineTo(px + 5, py);
    ctx.lineTo(px, py + 5);
    ctx.lineTo(px - 5, py);
    ctx.closePath();
    ctx.fill();
    ctx.fillText(`L${mark.id}`, px + 7, py - 7);
  }

  // Active plan (solid) and draft (dashed), with acceptance circles.
  drawPlan(ctx, canvas, state.activePlan, "#3a7", false, scenario.plan.acceptanceRadius);
  if (state.draftDirty) {
    drawPlan(ctx, canvas, state.draftPlan, "#cc4", true, null);
  }
  if (state.activeWaypoint !== null) {
    const wp = state.activePlan[state.activeWaypoint];
    if (wp !== undefined) {
      const [px, py] = toPixels(canvas, wp[0], wp[1]);
      ctx.strokeStyle = "#fff";
      ctx.beginPath();
      ctx.arc(px, py, 8, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }

  // Estimate: confidence ellipse under the vehicle marker.
  if (state.estimate !== null) {
    const [px, py] = toPixels(canvas, state.estimate.north, state.estimate.east);
    ctx.strokeStyle = "#59f";
    ctx.beginPath();
    // Ellipse angle is from north toward east; canvas rotation is from
    // screen-x (east) clockwise, so convert.
    ctx.ellipse(
      px, py,
      Math.max(state.estimate.ellipse.semiMajor * MAP_SCALE, 1),
      Math.max(state.estimate.ellipse.semiMinor * MAP_SCALE, 1),
      Math.PI / 2 - state.estimate.ellipse.angle,
      0, 2 * Math.PI);
    ctx.stroke();
  }

  // Vehicle: triangle pointing along the heading.
  if (state.vehicle !== null) {
    const [px, py] = toPixels(canvas, state.vehicle.north, state.vehicle.east);
    const screenAngle = state.vehicle.heading - Math.PI / 2;
    ctx.save();
    ctx.translate(px, py);
    ctx.rotate(screenAngle);
    ctx.fillStyle = state.connected ? "#fc3" : "#777";
    ctx.beginPath();
    ctx.moveTo(10, 0);
    ctx.lineTo(-6, 5);
    ctx.lineTo(-6, -5);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }
}

function drawPlan(
  ctx: CanvasRenderingContext2D,
  canvas: HTMLCanvasElement,
  plan: [number, number][],
  color: string,
  dashed: boolean,
  acceptanceRadius: number | null,
): void {
  if (plan.length === 0) {
    return;
  }
  ctx.strokeStyle = color;
  ctx.setLineDash(dashed ? [5, 4] : []);
  ctx.beginPath();
  for (let i = 0; i < plan.length; i += 1) {
    const [px, py] = toPixels(canvas, plan[i]![0], plan[i]![1]);
    if (i === 0) {
      ctx.moveTo(px, py);
    } else {
      ctx.lineTo(px, py);
    }
  }
  ctx.stroke();
  for (const [north, east] of plan) {
    const [px, py] = toPixels(canvas, north, east);
    ctx.beginPath();
    ctx.arc(px, py, 4, 0, 2 * Math.PI);
    ctx.stroke();
    if (acceptanceRadius !== null) {
      ctx.save();
      ctx.globalAlpha = 0.25;
      ctx.beginPath();
      ctx.arc(px, py, acceptanceRadius * MAP_SCALE, 0, 2 * Math.PI);
      ctx.stroke();
      ctx.restore();
    }
  }
  ctx.setLineDash([]);
}

// ----------------------------------------------------------------- teleop

function wireTeleop(dom: Dom, teleop: ManipulationView): void {
  window.addEventListener("keydown", (event) => {
    if (event.code === "Space" && !event.repeat) {
      event.preventDefault();
      teleop.clutchDown();
    }
  });
  window.addEventListener("keyup", (event) => {
    if (event.code === "Space") {
      teleop.clutchUp();
    }
  });

  let last: [number, number] | null = null;
  dom.teleopPad.onmousedown = (event) => {
    last = [event.clientX, event.clientY];
  };
  dom.teleopPad.onmousemove = (event) => {
    if (last === null) {
      return;
    }
    const dx = event.clientX - last[0];
    const dy = event.clientY - last[1];
    last = [event.clientX, event.clientY];
    // Pad x maps to limb-frame y (sideways), pad y to limb-frame z (down
    // the approach axis); hold Alt to drive limb-frame x instead of y.
    const meters = DRAG_METERS_PER_PIXEL;
    if (event.altKey) {
      teleop.pointerMove(-dy * meters, 0, 0);
    } else {
      teleop.pointerMove(0, dx * meters, dy * meters);
    }
  };
  const stop = (): void => {
    last = null;
  };
  dom.teleopPad.onmouseup = stop;
  dom.teleopPad.onmouseleave = stop;
}

// ----------------------------------------------------------------- panels

function paintPanels(
  dom: Dom,
  session: ConsoleSession,
  map: NavigationView,
  modes: ModePanel,
  teleop: ManipulationView,
  boards: Dashboards,
): void {
  const mapState = map.state();
  dom.banner.textContent = mapState.banner ?? "";
  dom.banner.style.display = mapState.banner === null ? "none" : "block";

  const modeState = modes.state();
  dom.modeLabel.textContent = modeState.currentLabel;
  if (modeState.requested !== null) {
    dom.modeStatus.textContent = `requested ${describeMode(modeState.requested)}...`;
  } else if (modeState.awaitingApply !== null) {
    dom.modeStatus.textContent = `accepted ${describeMode(modeState.awaitingApply)}, applying`;
  } else {
    dom.modeStatus.textContent = "";
  }
  if (modeState.lastRejection !== null) {
    const r = modeState.lastRejection;
    dom.rejection.textContent =
      `${describeMode(r.target)} rejected: ${r.reason} (click to dismiss)`;
    dom.rejection.style.display = "block";
  } else {
    dom.rejection.style.display = "none";
  }
  dom.faults.textContent = modeState.faultBanner ?? "";
  dom.faults.style.display = modeState.faultBanner === null ? "none" : "block";

  const teleopState = teleop.state();
  const force = teleopState.force;
  dom.forceFill.style.width = `${Math.min(force.force * 4, 100)}%`;
  dom.forceLabel.textContent = force.contact
    ? `${force.force.toFixed(2)} N (${(force.penetration * 1000).toFixed(1)} mm in)`
    : "free";
  dom.clutchLabel.textContent = teleopState.clutch
    ? "clutch ENGAGED (space)"
    : "clutch released -- hold space to drive";

  const power = boards.power();
  const enduranceText =
    power.endurance === null
      ? "-"
      : power.endurance === "unbounded"
        ? "unbounded (umbilical)"
        : `${power.endurance.toFixed(2)} h`;
  dom.power.textContent = power.source === null
    ? "no telemetry"
    : `${power.source} | ${power.socWh?.toFixed(1)} Wh | ` +
      `${power.totalW?.toFixed(0)} W now / ${power.meanW?.toFixed(0)} W avg | ` +
      `${power.busV?.toFixed(1)} V | endurance ${enduranceText}`;

  const link = boards.link();
  dom.link.textContent = link.kind === null
    ? "no telemetry"
    : `${link.kind} | ${link.bandwidthKbps?.toFixed(0)} kbps | ` +
      `${link.latencyMs?.toFixed(0)} ms | lost ${link.missedFrames}`;
  dom.gapDot.dataset.state = link.indicator;
  dom.gapDot.title = `telemetry ${link.indicator}`;
}

startConsole().catch((err) => {
  const banner = document.getElementById("banner");
  if (banner !== null) {
    banner.textContent = `console failed to start: ${err}`;
    banner.style.display = "block";
  }
});
