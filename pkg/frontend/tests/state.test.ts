import { describe, expect, it } from "vitest";

import { connectionChanged, initialViewState, reduce, BANNERS } from "../src/state";
import { ServerMessage, TickMessage } from "../src/protocol";

function tick(partial: Partial<TickMessage>): TickMessage {
  return {
    kind: "tick",
    time: 0,
    pose: [0, 0, 0],
    state: "start",
    led: "green",
    ...partial,
  };
}

function tinyMapMessage(which: "prior" | "posterior"): ServerMessage {
  // 2x2 map: occupied, free / unknown, free
  const payload = new Uint8Array([
    ...new TextEncoder().encode("P5\n2 2\n255\n"),
    0, 254, 205, 254,
  ]);
  return {
    kind: "map",
    which,
    pgm: Buffer.from(payload).toString("base64"),
    meta: "resolution: 0.1\norigin: 0 0 0\nnegate: 0\n",
  };
}

describe("view state reducer", () => {
  it("counts exactly one led change and one beep per transition", () => {
    let view = initialViewState();
    const stream: ServerMessage[] = [
      tick({ time: 0.05 }),
      tick({ time: 0.1 }),
      tick({ time: 0.15, state: "record", led: "red", beep: true }),
      tick({ time: 0.2, state: "record", led: "red" }),
      tick({ time: 0.25, state: "keep_off", led: "blue", beep: true }),
      tick({ time: 0.3, state: "keep_off", led: "blue" }),
      tick({ time: 0.35, state: "start", led: "green", beep: true }),
    ];
    for (const msg of stream) view = reduce(view, msg);
    expect(view.ledChanges).toBe(3);
    expect(view.beeps).toBe(3);
    expect(view.bannerChanges).toBe(3);
    expect(view.banner).toBe(BANNERS.start);
  });

  it("raises the one-shot beep flag only on beep ticks", () => {
    let view = initialViewState();
    view = reduce(view, tick({ state: "record", led: "red", beep: true }));
    expect(view.beepPending).toBe(true);
    view = reduce(view, tick({ state: "record", led: "red" }));
    expect(view.beepPending).toBe(false);
  });

  it("grows the trail in record, keeps it in keep_off, clears in start", () => {
    let view = initialViewState();
    view = reduce(view, tick({ state: "record", led: "red", pose: [1, 1, 0] }));
    view = reduce(view, tick({ state: "record", led: "red", pose: [1.5, 1, 0] }));
    view = reduce(view, tick({ state: "record", led: "red", pose: [1.505, 1, 0] }));
    expect(view.trail).toEqual([[1, 1], [1.5, 1]]); // sub-2cm step skipped
    view = reduce(view, tick({ state: "keep_off", led: "blue", pose: [1.5, 1, 0] }));
    expect(view.trail.length).toBe(2);
    view = reduce(view, tick({ state: "start", led: "green", pose: [1.5, 1, 0] }));
    expect(view.trail).toEqual([]);
  });

  it("replaying the same stream reproduces the identical view", () => {
    const stream: ServerMessage[] = [
      tick({ time: 0.05 }),
      tinyMapMessage("prior"),
      tick({ time: 0.1, state: "record", led: "red", beep: true, laser_world: [0.5, 0.5] }),
      tinyMapMessage("posterior"),
      { kind: "report", report: { scenario: "x", jaccard: 0.9, teaching_time: 3,
                                  border_length: 1, borders: [], passed: true } },
    ];
    const a = stream.reduce(reduce, initialViewState());
    const b = stream.reduce(reduce, initialViewState());
    expect(JSON.stringify(a)).toBe(JSON.stringify(b));
    expect(a.prior?.width).toBe(2);
    expect(a.posterior?.resolution).toBeCloseTo(0.1);
    expect(a.report?.jaccard).toBeCloseTo(0.9);
  });

  it("decodes map payloads into trinary-friendly pixels", () => {
    const view = reduce(initialViewState(), tinyMapMessage("prior"));
    expect(Array.from(view.prior!.pixels)).toEqual([0, 254, 205, 254]);
  });

  it("shows errors and flags reconnects read-only", () => {
    let view = initialViewState();
    view = reduce(view, { kind: "error", code: "malformed_message", message: "bad" });
    expect(view.errorBanner).toContain("malformed_message");
    view = connectionChanged(view, false, true);
    expect(view.connected).toBe(false);
    view = connectionChanged(view, true, true);
    expect(view.readOnly).toBe(true);
  });
});
