/**
 * Mode panel view model: shows the vehicle's operator/navigation/link mode,
 * requests transitions, and surfaces the vehicle's responses.  Rejection
 * reasons are kept verbatim -- they are machine-readable codes with a
 * human-readable tail and must not be reworded by the UI.
 */

import {
  type ModeName,
  describeMode,
  sameMode,
} from "./messages.js";
import type { PendingCommand } from "./session.js";
import { ConsoleSession } from "./session.js";

export interface Rejection {
  target: ModeName;
  /** Verbatim reason string from the rejection ack. */
  reason: string;
  atT: number;
}

export interface ModePanelState {
  current: ModeName | null;
  currentLabel: string;
  /** Transition accepted by the vehicle but not yet visible in telemetry. */
  awaitingApply: ModeName | null;
  /** Transition sent and not yet acknowledged. */
  requested: ModeName | null;
  lastRejection: Rejection | null;
  /** Active fault labels; non-empty also raises the banner. */
  faults: string[];
  faultBanner: string | null;
}

export class ModePanel {
  private readonly session: ConsoleSession;
  private request: PendingCommand | null = null;
  private requestTarget: ModeName | null = null;
  private awaiting: ModeName | null = null;
  private rejection: Rejection | null = null;

  constructor(session: ConsoleSession) {
    this.session = session;
    session.onAck((ack) => {
      if (this.request === null || ack.body.command_id !== this.request.id ||
          this.requestTarget === null) {
        return;
      }
      if (ack.body.status === "accepted") {
        this.awaiting = this.requestTarget;
      } else {
        this.rejection = {
          target: this.requestTarget,
          reason: ack.body.reason ?? "(no reason given)",
          atT: ack.t,
        };
      }
      this.request = null;
      this.requestTarget = null;
    });
    session.onTelemetry((frame) => {
      if (this.awaiting !== null && sameMode(frame.body.mode, this.awaiting)) {
        this.awaiting = null; // panel reflects the new state
      }
    });
  }

  /** Ask the vehicle to change mode; the ack and telemetry drive the panel. */
  requestTransition(target: ModeName): PendingCommand {
    const pending = this.session.sendCommand({
      kind: "mode_transition",
      id: this.session.nextCommandId("mode"),
      target,
    });
    this.request = pending;
    this.requestTarget = target;
    return pending;
  }

  dismissRejection(): void {
    this.rejection = null;
  }

  state(): ModePanelState {
    const frame = this.session.latest;
    const current = frame === null ? null : frame.body.mode;
    const faults = frame === null ? [] : frame.body.faults;
    return {
      current,
      currentLabel: current === null ? "no telemetry" : describeMode(current),
      awaitingApply: this.awaiting,
      requested: this.requestTarget,
      lastRejection: this.rejection,
      faults,
      faultBanner: faults.length === 0 ? null : `FAULT: ${faults.join(", ")}`,
    };
  }
}
