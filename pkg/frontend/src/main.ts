// Browser wiring: connect to the session service, stream ticks into the
// view state, paint the canvas, and translate pointer/keys into protocol
// messages. The pointer is the laser: the robot still only perceives it
// through its rendered camera frames on the server.

import { ConsoleSession, Transport } from "./client";
import { canvasToNorm, drawView } from "./render";
import { ViewState } from "./state";

const SERVICE = (window.location.hash.slice(1) || "http://127.0.0.1:8750").replace(/\/$/, "");

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner") as HTMLDivElement;
const led = document.getElementById("led") as HTMLSpanElement;
const info = document.getElementById("info") as HTMLDivElement;
const mapSelect = document.getElementById("maps") as HTMLSelectElement;
const startBtn = document.getElementById("start") as HTMLButtonElement;
const nextBtn = document.getElementById("next") as HTMLButtonElement;
const prevBtn = document.getElementById("prev") as HTMLButtonElement;
const overlayToggle = document.getElementById("overlay") as HTMLInputElement;

let session: ConsoleSession | null = null;
let view: ViewState | null = null;
let viewport = { scale: 50, height: canvas.height };
let audio: AudioContext | null = null;

function beep(): void {
  audio = audio ?? new AudioContext();
  const osc = audio.createOscillator();
  const gain = audio.createGain();
  osc.frequency.value = 880;
  gain.gain.setValueAtTime(0.12, audio.currentTime);
  gain.gain.exponentialRampToValueAtTime(1e-4, audio.currentTime + 0.18);
  osc.connect(gain).connect(audio.destination);
  osc.start();
  osc.stop(audio.currentTime + 0.2);
}

function paint(): void {
  if (view) {
    viewport = drawView(ctx, view, overlayToggle.checked);
    banner.textContent = view.errorBanner ?? view.banner;
    led.style.background = view.led;
    const j = view.report?.jaccard;
    info.textContent =
      `t=${view.time.toFixed(1)}s  state=${view.state}` +
      (view.report ? `  borders=${view.report.borders.length}` : "") +
      (j != null ? `  jaccard=${(j * 100).toFixed(1)}%` : "") +
      (view.readOnly ? "  [read-only]" : "");
  }
  requestAnimationFrame(paint);
}
requestAnimationFrame(paint);

function websocketTransport(url: string): Transport {
  const ws = new WebSocket(url);
  return {
    send: (data) => { if (ws.readyState === WebSocket.OPEN) ws.send(data); },
    close: () => ws.close(),
    onMessage: (handler) => { ws.onmessage = (ev) => handler(String(ev.data)); },
    onClose: (handler) => { ws.onclose = () => handler(); },
  };
}

async function listMaps(): Promise<void> {
  const entries = await (await fetch(`${SERVICE}/maps`)).json();
  mapSelect.innerHTML = "";
  for (const entry of entries) {
    const option = document.createElement("option");
    option.value = entry.id;
    option.textContent = entry.name;
    mapSelect.appendChild(option);
  }
}

async function startSession(): Promise<void> {
  const created = await (await fetch(`${SERVICE}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ map: mapSelect.value }),
  })).json();
  const wsUrl = `${SERVICE.replace(/^http/, "ws")}/session/${created.session}`;
  session = new ConsoleSession(websocketTransport(wsUrl));
  session.onChange((v) => {
    view = v;
    if (v.beepPending) beep();
    if (!v.connected) scheduleReconnect(wsUrl);
  });
  session.requestMap("prior");
}

let reconnectTimer: ReturnType<typeof setTimeout> | null = null;
function scheduleReconnect(wsUrl: string): void {
  if (reconnectTimer || !session) return;
  reconnectTimer = setTimeout(() => {
    reconnectTimer = null;
    session?.attach(websocketTransport(wsUrl)); // resumes read-only
  }, 2000);
}

canvas.addEventListener("pointermove", (ev) => {
  if (!session || !view?.prior || view.readOnly) return;
  const rect = canvas.getBoundingClientRect();
  const [xn, yn] = canvasToNorm(viewport, view.prior,
                                ev.clientX - rect.left, ev.clientY - rect.top);
  if (xn >= 0 && xn <= 1 && yn >= 0 && yn <= 1) session.pointTo(xn, yn);
});
canvas.addEventListener("pointerleave", () => session?.pointerOff());

window.addEventListener("keydown", (ev) => {
  if (!session || view?.readOnly) return;
  if (ev.key === "n" || ev.key === "N") session.fireEvent("next");
  if (ev.key === "p" || ev.key === "P") session.fireEvent("previous");
});
nextBtn.addEventListener("click", () => session?.fireEvent("next"));
prevBtn.addEventListener("click", () => session?.fireEvent("previous"));
startBtn.addEventListener("click", () => void startSession());

void listMaps();
