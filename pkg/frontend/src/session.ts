/**
 * Console-side session: owns the transport, validates every inbound
 * message, tracks command acknowledgements with timeouts, and watches the
 * telemetry sequence numbers for gaps so lost frames show up as a
 * link-quality indicator instead of silent staleness.
 *
 * Telemetry frames and acks ride independent sequence streams on the wire;
 * gap detection therefore keys on telemetry seq only.
 */

import {
  type AckMessage,
  type CommandBody,
  type DownlinkMessage,
  type TelemetryMessage,
  SchemaError,
  decodeDownlink,
  encodeCommand,
  makeCommand,
} from "./messages.js";

/** Anything that can carry text frames to the gateway (a WebSocket, a stub). */
export interface Transport {
  send(text: string): void;
  close(): void;
}

export type ConnectionState = "idle" | "connected" | "disconnected";

export type PendingStatus = "pending" | "accepted" | "rejected" | "timeout";

export interface PendingCommand {
  id: string;
  body: CommandBody;
  sentAt: number;
  status: PendingStatus;
  /** Verbatim reason string from a rejection ack. */
  reason?: string;
}

export interface LinkQuality {
  /** Total telemetry frames lost to sequence gaps since connect. */
  missedFrames: number;
  /** Frames received since the most recent gap. */
  framesSinceGap: number;
  /** True until `recoveryFrames` contiguous frames follow a gap. */
  degraded: boolean;
}

export interface SessionOptions {
  /** Millisecond clock; injectable for tests. Defaults to Date.now. */
  now?: () => number;
  /** Pending commands older than this are marked "timeout". */
  ackTimeoutMs?: number;
  /** Contiguous frames needed to clear the degraded indicator. */
  recoveryFrames?: number;
}

export class ConsoleSession {
  latest: TelemetryMessage | null = null;
  connection: ConnectionState = "idle";
  /** Messages that failed schema validation and were dropped, by count. */
  badMessages = 0;
  lastSchemaError: string | null = null;

  private transport: Transport | null = null;
  private readonly now: () => number;
  private readonly ackTimeoutMs: number;
  private readonly recoveryFrames: number;
  private uplinkSeq = 0;
  private commandCounter = 0;
  private lastTelemetrySeq: number | null = null;
  private missedFrames = 0;
  private framesSinceGap = 0;
  private sawGap = false;
  private readonly pendingById = new Map<string, PendingCommand>();
  private readonly telemetryListeners: ((frame: TelemetryMessage) => void)[] = [];
  private readonly ackListeners: ((ack: AckMessage) => void)[] = [];

  constructor(options: SessionOptions = {}) {
    this.now = options.now ?? (() => Date.now());
    this.ackTimeoutMs = options.ackTimeoutMs ?? 5000;
    this.recoveryFrames = options.recoveryFrames ?? 20;
  }

  attach(transport: Transport): void {
    this.transport = transport;
    this.connection = "connected";
  }

  handleClose(): void {
    this.connection = "disconnected";
    this.transport = null;
  }

  onTelemetry(listener: (frame: TelemetryMessage) => void): void {
    this.telemetryListeners.push(listener);
  }

  onAck(listener: (ack: AckMessage) => void): void {
    this.ackListeners.push(listener);
  }

  /**
   * Validate and dispatch one raw text frame from the gateway.  Returns the
   * decoded message, or null if it was dropped as schema-invalid (the
   * console never renders such frames).
   */
  handleRaw(raw: string): DownlinkMessage | null {
    let message: DownlinkMessage;
    try {
      message = decodeDownlink(raw);
    } catch (err) {
      if (err instanceof SchemaError) {
        this.badMessages += 1;
        this.lastSchemaError = err.message;
        return null;
      }
      throw err;
    }
    if (message.type === "telemetry") {
      this.trackTelemetrySeq(message.seq);
      this.latest = message;
      for (const listener of this.telemetryListeners) {
        listener(message);
      }
    } else {
      this.resolveAck(message);
      for (const listener of this.ackListeners) {
        listener(message);
      }
    }
    return message;
  }

  /**
   * Wrap a command body in the wire envelope and send it.  The returned
   * record tracks the acknowledgement; command ids are unique per session.
   */
  sendCommand(body: CommandBody): PendingCommand {
    if (this.transport === null || this.connection !== "connected") {
      throw new Error("not connected");
    }
    const t = this.latest === null ? 0 : this.latest.t;
    const message = makeCommand(this.uplinkSeq, t, body);
    this.uplinkSeq += 1;
    const pending: PendingCommand = {
      id: body.id, body, sentAt: this.now(), status: "pending",
    };
    this.pendingById.set(body.id, pending);
    this.transport.send(encodeCommand(message));
    return pending;
  }

  /** A fresh command id, unique within this session. */
  nextCommandId(prefix: string): string {
    this.commandCounter += 1;
    return `${prefix}-${this.commandCounter}`;
  }

  /** Pending commands past the ack timeout get flagged; call on a UI tick. */
  expirePending(): void {
    const cutoff = this.now() - this.ackTimeoutMs;
    for (const pending of this.pendingById.values()) {
      if (pending.status === "pending" && pending.sentAt < cutoff) {
        pending.status = "timeout";
      }
    }
  }

  pendingCommands(): PendingCommand[] {
    return [...this.pendingById.values()];
  }

  commandStatus(id: string): PendingCommand | undefined {
    return this.pendingById.get(id);
  }

  linkQuality(): LinkQuality {
    return {
      missedFrames: this.missedFrames,
      framesSinceGap: this.framesSinceGap,
      degraded: this.sawGap && this.framesSinceGap < this.recoveryFrames,
    };
  }

  /** Compact indicator for the link widget. */
  linkIndicator(): "ok" | "degraded" | "stale" {
    if (this.connection !== "connected") {
      return "stale";
    }
    return this.linkQuality().degraded ? "degraded" : "ok";
  }

  private trackTelemetrySeq(seq: number): void {
    if (this.lastTelemetrySeq !== null && seq > this.lastTelemetrySeq + 1) {
      this.missedFrames += seq - this.lastTelemetrySeq - 1;
      this.sawGap = true;
      this.framesSinceGap = 0;
    } else {
      this.framesSinceGap += 1;
    }
    this.lastTelemetrySeq = seq;
  }

  private resolveAck(ack: AckMessage): void {
    const pending = this.pendingById.get(ack.body.command_id);
    if (pending === undefined) {
      return; // ack for a command from another operator/script
    }
    pending.status = ack.body.status;
    if (ack.body.reason !== undefined) {
      pending.reason = ack.body.reason;
    }
  }
}
