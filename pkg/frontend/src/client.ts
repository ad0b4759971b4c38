// Session client: wraps a WebSocket-ish transport, folds server messages
// into the view state, and sends the user's pointer and button input.
// A minimal transport interface keeps it runnable under node for tests.

import { ClientMessage, parseServerMessage, ServerMessage } from "./protocol";
import { connectionChanged, initialViewState, reduce, ViewState } from "./state";

export interface Transport {
  send(data: string): void;
  close(): void;
  onMessage(handler: (data: string) => void): void;
  onClose(handler: () => void): void;
}

export const POINTER_RATE_LIMIT_HZ = 30;

export class ConsoleSession {
  view: ViewState = initialViewState();
  private listeners: Array<(v: ViewState) => void> = [];
  private lastLaserSent = Number.NEGATIVE_INFINITY;
  private pendingLaser: { x: number; y: number } | null = null;

  constructor(private transport: Transport, private now: () => number = () => Date.now()) {
    this.view = { ...this.view, connected: true };
    this.bind(transport);
  }

  private bind(transport: Transport): void {
    transport.onMessage((data) => this.handleRaw(data));
    transport.onClose(() => {
      this.view = connectionChanged(this.view, false, true);
      this.emit();
    });
  }

  /** Re-attach after a connection loss; the resumed session is read-only. */
  attach(transport: Transport): void {
    this.transport = transport;
    this.bind(transport);
    this.view = connectionChanged(this.view, true, true);
    this.emit();
  }

  onChange(listener: (v: ViewState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.view);
  }

  handleRaw(data: string): ServerMessage {
    const msg = parseServerMessage(data);
    this.view = reduce(this.view, msg);
    this.emit();
    return msg;
  }

  send(msg: ClientMessage): void {
    this.transport.send(JSON.stringify(msg));
  }

  /** Pointer position in room-normalized coordinates, rate-limited. */
  pointTo(xNorm: number, yNorm: number): void {
    const clamped = {
      x: Math.min(1, Math.max(0, xNorm)),
      y: Math.min(1, Math.max(0, yNorm)),
    };
    const interval = 1000 / POINTER_RATE_LIMIT_HZ;
    const t = this.now();
    if (t - this.lastLaserSent >= interval) {
      this.lastLaserSent = t;
      this.pendingLaser = null;
      this.send({ kind: "set_laser", x_norm: clamped.x, y_norm: clamped.y });
    } else {
      this.pendingLaser = clamped; // flushed by the next pointTo or flush()
    }
  }

  flushPointer(): void {
    if (this.pendingLaser) {
      this.lastLaserSent = this.now();
      this.send({
        kind: "set_laser",
        x_norm: this.pendingLaser.x,
        y_norm: this.pendingLaser.y,
      });
      this.pendingLaser = null;
    }
  }

  pointerOff(): void {
    this.pendingLaser = null;
    this.send({ kind: "set_laser", off: true });
  }

  fireEvent(event: "next" | "previous"): void {
    this.send({ kind: "event", event });
  }

  rotate(targetYaw: number): void {
    this.send({ kind: "rotate", target_yaw: targetYaw });
  }

  reset(): void {
    this.send({ kind: "reset" });
  }

  requestMap(which: "prior" | "posterior"): void {
    this.send({ kind: "request_map", which });
  }

  /** Lockstep stepping; only scripted replays use this. */
  advance(ticks: number): void {
    this.send({ kind: "advance", ticks });
  }
}

export interface PointerSample {
  t: number;
  xNorm?: number;
  yNorm?: number;
  off?: boolean;
  event?: "next" | "previous";
}

/**
 * Replay a recorded pointer script through the console's own send path in
 * lockstep: per simulation tick, forward due events and the pointer
 * position, then advance one tick and wait for its tick message.
 */
export async function replayPointerScript(
  session: ConsoleSession,
  script: PointerSample[],
  dt: number,
  nTicks: number,
  waitForTick: () => Promise<void>,
): Promise<ViewState> {
  const events = script.filter((s) => s.event);
  const moves = script.filter((s) => !s.event);
  let eventIdx = 0;
  let moveIdx = 0;
  let t = 0;
  for (let k = 0; k < nTicks; k++) {
    while (eventIdx < events.length && events[eventIdx].t <= t + 1e-9) {
      session.fireEvent(events[eventIdx].event!);
      eventIdx++;
    }
    while (moveIdx < moves.length && moves[moveIdx].t <= t + 1e-9) {
      const sample = moves[moveIdx];
      if (sample.off) {
        session.pointerOff();
      } else {
        session.send({ kind: "set_laser", x_norm: sample.xNorm!, y_norm: sample.yNorm! });
      }
      moveIdx++;
    }
    session.advance(1);
    await waitForTick();
    t += dt;
  }
  return session.view;
}
