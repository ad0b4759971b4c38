// Conversion of a scenario file's laser script and events into the
// per-tick pointer samples a lockstep replay sends. Interpolation follows
// the simulator's rules (linear between waypoints, gaps go dark, the last
// position holds) with the same floating-point expression order, so a
// replay reproduces the headless run exactly.

import { PointerSample } from "./client";

export interface ScenarioWaypoint {
  t: number;
  x?: number;
  y?: number;
  off?: boolean;
}

export interface ScenarioEvent {
  t: number;
  event: "next" | "previous";
}

export interface ScenarioScript {
  dt: number;
  duration: number;
  waypoints: ScenarioWaypoint[];
  events: ScenarioEvent[];
  roomWidth: number;   // meters; map width * resolution
  roomHeight: number;
}

export function laserAt(waypoints: ScenarioWaypoint[], t: number): [number, number] | null {
  if (waypoints.length === 0 || t < waypoints[0].t) return null;
  for (let i = 0; i < waypoints.length - 1; i++) {
    const a = waypoints[i];
    const b = waypoints[i + 1];
    if (t < b.t) {
      if (a.off) return null;
      if (b.off || b.t <= a.t) return [a.x!, a.y!];
      const frac = (t - a.t) / (b.t - a.t);
      return [a.x! + frac * (b.x! - a.x!), a.y! + frac * (b.y! - a.y!)];
    }
  }
  const last = waypoints[waypoints.length - 1];
  return last.off ? null : [last.x!, last.y!];
}

export function tickCount(duration: number, dt: number): number {
  let t = 0;
  let ticks = 0;
  while (t < duration - 1e-9) {
    t += dt;
    ticks += 1;
  }
  return ticks;
}

/** One pointer sample per simulation tick, in normalized room coordinates. */
export function scriptToPointerSamples(script: ScenarioScript): PointerSample[] {
  const samples: PointerSample[] = [];
  for (const ev of script.events) {
    samples.push({ t: ev.t, event: ev.event });
  }
  let t = 0;
  const n = tickCount(script.duration, script.dt);
  let wasOff = true;
  for (let k = 0; k < n; k++) {
    const spot = laserAt(script.waypoints, t);
    if (spot === null) {
      if (!wasOff) samples.push({ t, off: true });
      wasOff = true;
    } else {
      samples.push({ t, xNorm: spot[0] / script.roomWidth, yNorm: spot[1] / script.roomHeight });
      wasOff = false;
    }
    t += script.dt;
  }
  // replayPointerScript consumes events and moves as separate queues, so
  // per-tick ordering (events first) is its concern, not this list's
  return samples;
}
