// The console's view state is a pure fold over the server message stream:
// replaying the same stream reproduces the identical view.

import { DecodedMap, decodePgm } from "./pgm";
import { LedColor, ReportMessage, ServerMessage, SessionState } from "./protocol";

export interface ViewState {
  connected: boolean;
  readOnly: boolean; // after a reconnect the console only observes
  time: number;
  pose: [number, number, number];
  state: SessionState;
  led: LedColor;
  laser: [number, number] | null;
  trail: Array<[number, number]>;
  prior: DecodedMap | null;
  posterior: DecodedMap | null;
  report: ReportMessage["report"] | null;
  banner: string;
  errorBanner: string | null;
  // cumulative counters, used by the feedback checks and the beep cue
  ledChanges: number;
  beeps: number;
  bannerChanges: number;
  beepPending: boolean; // one-shot flag the audio layer consumes
}

export const BANNERS: Record<SessionState, string> = {
  start: "Start: guide the robot with the pointer",
  record: "Record: tracing the border",
  keep_off: "Keep Off: point into the area to seal",
};

export function initialViewState(): ViewState {
  return {
    connected: false,
    readOnly: false,
    time: 0,
    pose: [0, 0, 0],
    state: "start",
    led: "green",
    laser: null,
    trail: [],
    prior: null,
    posterior: null,
    report: null,
    banner: BANNERS.start,
    errorBanner: null,
    ledChanges: 0,
    beeps: 0,
    bannerChanges: 0,
    beepPending: false,
  };
}

export function reduce(view: ViewState, msg: ServerMessage): ViewState {
  switch (msg.kind) {
    case "tick": {
      const next: ViewState = { ...view, beepPending: false };
      next.time = msg.time;
      next.pose = msg.pose;
      next.laser = msg.laser_world ?? null;
      if (msg.led !== view.led) next.ledChanges = view.ledChanges + 1;
      if (msg.beep) {
        next.beeps = view.beeps + 1;
        next.beepPending = true;
      }
      const banner = BANNERS[msg.state];
      if (banner !== view.banner) next.bannerChanges = view.bannerChanges + 1;
      next.banner = banner;
      // the trail mirrors the recorded pose history: grows in Record,
      // survives Keep Off, and clears when the session is back in Start
      if (msg.state === "record") {
        const last = view.trail[view.trail.length - 1];
        const p: [number, number] = [msg.pose[0], msg.pose[1]];
        if (!last || Math.hypot(last[0] - p[0], last[1] - p[1]) >= 0.02) {
          next.trail = [...view.trail, p];
        }
      } else if (msg.state === "start") {
        next.trail = [];
      }
      next.state = msg.state;
      next.led = msg.led;
      return next;
    }
    case "map": {
      const decoded = decodePgm(msg.pgm, msg.meta);
      return msg.which === "prior"
        ? { ...view, prior: decoded }
        : { ...view, posterior: decoded };
    }
    case "report":
      return { ...view, report: msg.report };
    case "error":
      return { ...view, errorBanner: `${msg.code}: ${msg.message}` };
  }
}

export function connectionChanged(view: ViewState, connected: boolean,
                                  hadSession: boolean): ViewState {
  return {
    ...view,
    connected,
    readOnly: view.readOnly || (connected && hadSession),
    errorBanner: connected ? view.errorBanner : "connection lost - reconnecting",
  };
}
