// Message types of the session service protocol. The console is a thin
// client: it renders the server's tick stream and sends pointer/button
// input back; it holds no simulation logic of its own.

export type SessionState = "start" | "record" | "keep_off";
export type LedColor = "green" | "red" | "blue";

export interface TickMessage {
  kind: "tick";
  time: number;
  pose: [number, number, number];
  state: SessionState;
  led: LedColor;
  laser_world?: [number, number];
  beep?: boolean;
}

export interface MapMessage {
  kind: "map";
  which: "prior" | "posterior";
  pgm: string; // base64 binary PGM
  meta: string;
}

export interface BorderReport {
  kind: string;
  length: number;
  teaching_time: number;
}

export interface ReportMessage {
  kind: "report";
  report: {
    scenario: string;
    jaccard: number | null;
    teaching_time: number;
    border_length: number;
    borders: BorderReport[];
    passed: boolean;
  };
}

export interface ErrorMessage {
  kind: "error";
  code: string;
  message: string;
}

export type ServerMessage = TickMessage | MapMessage | ReportMessage | ErrorMessage;

export type ClientMessage =
  | { kind: "set_laser"; x_norm: number; y_norm: number }
  | { kind: "set_laser"; off: true }
  | { kind: "event"; event: "next" | "previous" }
  | { kind: "rotate"; target_yaw: number }
  | { kind: "reset" }
  | { kind: "request_map"; which: "prior" | "posterior" }
  | { kind: "advance"; ticks: number };

export function parseServerMessage(data: string): ServerMessage {
  const parsed = JSON.parse(data);
  if (
    typeof parsed !== "object" || parsed === null ||
    !["tick", "map", "report", "error"].includes(parsed.kind)
  ) {
    throw new Error(`unrecognized server message: ${data.slice(0, 80)}`);
  }
  return parsed as ServerMessage;
}
