"""Live teaching sessions over WebSocket + HTTP.

The service is a thin adapter around Simulation: clients steer the laser
spot, fire next/previous, and watch per-tick state; the sim loop stays
single-threaded per session with client messages drained once per tick.

Endpoints:
  GET  /maps                         list servable session configs
  POST /sessions {"map": id}         create a session (add "lockstep": true
                                     for deterministic scripted clients)
  GET  /sessions/{id}/posterior.pgm  current posterior map payload
  WS   /session/{id}                 the tick/command channel

Client messages: set_laser {x_norm,y_norm}|{off}, event {name}, rotate
{target_yaw}, reset, request_map {which}, and (lockstep only) advance
{ticks}. Server messages: tick, map, report, error.
"""
from __future__ import annotations

import asyncio
import base64
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from aiohttp import WSMsgType, web

from .errors import BorderforgeError
from .fsm import TransitionEvent
from .grid import OccupancyGrid
from .scenario import Scenario, load_scenario, quantize
from .simulate import Simulation

log = logging.getLogger("borderforge.service")


def _pgm_payload(grid: OccupancyGrid) -> tuple[bytes, str]:
    import numpy as np
    from .grid import FREE, OCCUPIED, PGM_FREE, PGM_OCCUPIED, PGM_UNKNOWN

    lut = np.full(3, PGM_UNKNOWN, dtype=np.uint8)
    lut[FREE] = PGM_FREE
    lut[OCCUPIED] = PGM_OCCUPIED
    pixels = lut[grid.cells[::-1, :]]
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    meta = (f"resolution: {grid.resolution!r}\n"
            f"origin: {grid.origin.x!r} {grid.origin.y!r} {grid.origin.theta!r}\n"
            f"negate: 0\n")
    return header + pixels.tobytes(), meta


@dataclass
class Session:
    sid: str
    scenario: Scenario
    sim: Simulation
    lockstep: bool
    subscribers: list = field(default_factory=list)
    borders_pushed: int = 0
    task: asyncio.Task | None = None
    closed: bool = False

    def world_from_norm(self, x_norm: float, y_norm: float):
        grid = self.sim.physical_map
        return (quantize(grid.origin.x + x_norm * grid.width * grid.resolution),
                quantize(grid.origin.y + y_norm * grid.height * grid.resolution))

    def tick_message(self) -> dict:
        entry = self.sim.log[-1] if self.sim.log else None
        msg = {
            "kind": "tick",
            "time": round(self.sim.t, 6),
            "pose": entry["pose"] if entry else [self.sim.pose.x, self.sim.pose.y,
                                                 self.sim.pose.theta],
            "state": self.sim.session.state.value,
            "led": self.sim.session.led,
        }
        if entry and entry.get("laser"):
            msg["laser_world"] = entry["laser"]
        if entry and entry.get("feedback"):
            msg["beep"] = True
        return msg

    def map_message(self, which: str) -> dict:
        grid = self.sim.physical_map if which == "prior" else self.sim.session.prior_map
        payload, meta = _pgm_payload(grid)
        return {"kind": "map", "which": which,
                "pgm": base64.b64encode(payload).decode("ascii"), "meta": meta}

    def report_message(self) -> dict:
        return {"kind": "report", "report": self.sim.build_report().to_dict()}

    async def broadcast(self, message: dict) -> None:
        data = json.dumps(message, sort_keys=True)
        for ws in list(self.subscribers):
            try:
                await ws.send_str(data)
            except ConnectionResetError:
                self.subscribers.remove(ws)

    async def advance(self, ticks: int) -> None:
        for _ in range(ticks):
            self.sim.tick()
            await self.broadcast(self.tick_message())
            if len(self.sim.session.borders) > self.borders_pushed:
                self.borders_pushed = len(self.sim.session.borders)
                await self.broadcast(self.map_message("posterior"))
                await self.broadcast(self.report_message())

    async def apply(self, msg: dict) -> None:
        kind = msg.get("kind")
        if kind == "set_laser":
            if msg.get("off"):
                self.sim.set_laser(None)
                return
            x, y = float(msg["x_norm"]), float(msg["y_norm"])
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError("normalized coordinates must be in [0, 1]")
            self.sim.set_laser(self.world_from_norm(x, y))
        elif kind == "event":
            self.sim.inject_event(TransitionEvent(msg["event"]))
        elif kind == "rotate":
            self.sim.set_rotate_target(float(msg["target_yaw"]))
        elif kind == "reset":
            self.sim.reset()
            self.borders_pushed = 0
        elif kind == "request_map":
            await self.broadcast(self.map_message(msg.get("which", "posterior")))
        elif kind == "advance":
            if not self.lockstep:
                raise ValueError("advance is only valid in lockstep sessions")
            await self.advance(int(msg.get("ticks", 1)))
        else:
            raise ValueError(f"unknown message kind {kind!r}")


class SessionService:
    def __init__(self, scenario_dir: str | Path, ticks_per_call: int = 1):
        self.scenario_dir = Path(scenario_dir)
        self.ticks_per_call = max(1, ticks_per_call)
        self.sessions: dict[str, Session] = {}
        self._counter = 0

    def list_maps(self) -> list[dict]:
        entries = []
        for path in sorted(self.scenario_dir.glob("*.json")):
            try:
                scenario = load_scenario(path)
            except BorderforgeError:
                continue
            entries.append({"id": path.stem, "name": scenario.name,
                            "width": scenario.intrinsics.width,
                            "resolution": 0.025})
        return entries

    def create_session(self, map_id: str, lockstep: bool = False) -> Session:
        path = self.scenario_dir / f"{map_id}.json"
        if not path.exists():
            from .errors import UnknownMap
            raise UnknownMap(f"no servable map {map_id!r}")
        scenario = load_scenario(path)
        self._counter += 1
        sid = f"{map_id}-{self._counter}"
        session = Session(sid=sid, scenario=scenario,
                          sim=Simulation(scenario, interactive=True),
                          lockstep=lockstep)
        self.sessions[sid] = session
        return session

    async def run_session(self, session: Session) -> None:
        """Real-time loop: drain queued messages, advance, sleep one period."""
        dt = session.scenario.dt
        try:
            while not session.closed:
                await session.advance(self.ticks_per_call)
                await asyncio.sleep(dt * self.ticks_per_call)
        except asyncio.CancelledError:
            pass


SERVICE_KEY = web.AppKey("service", SessionService)


async def _shutdown_sessions(app: web.Application) -> None:
    for session in app[SERVICE_KEY].sessions.values():
        session.closed = True
        if session.task is not None:
            session.task.cancel()
            try:
                await session.task
            except asyncio.CancelledError:
                pass


def make_app(scenario_dir: str | Path, ticks_per_call: int = 1) -> web.Application:
    service = SessionService(scenario_dir, ticks_per_call)
    app = web.Application()
    app[SERVICE_KEY] = service
    app.on_cleanup.append(_shutdown_sessions)

    async def maps(request: web.Request) -> web.Response:
        return web.json_response(service.list_maps())

    async def create(request: web.Request) -> web.Response:
        body = await request.json()
        from .errors import UnknownMap
        try:
            session = service.create_session(body["map"],
                                             lockstep=bool(body.get("lockstep")))
        except UnknownMap as exc:
            return web.json_response({"error": str(exc)}, status=404)
        except KeyError:
            return web.json_response({"error": "missing field: map"}, status=400)
        if not session.lockstep:
            session.task = asyncio.get_event_loop().create_task(
                service.run_session(session))
        return web.json_response({"session": session.sid, "dt": session.scenario.dt})

    async def posterior(request: web.Request) -> web.Response:
        session = service.sessions.get(request.match_info["sid"])
        if session is None:
            return web.json_response({"error": "unknown session"}, status=404)
        payload, _ = _pgm_payload(session.sim.session.prior_map)
        return web.Response(body=payload, content_type="image/x-portable-graymap")

    async def socket(request: web.Request) -> web.WebSocketResponse:
        session = service.sessions.get(request.match_info["sid"])
        ws = web.WebSocketResponse()
        await ws.prepare(request)
        if session is None:
            await ws.send_str(json.dumps(
                {"kind": "error", "code": "session_closed",
                 "message": "unknown or closed session"}))
            await ws.close()
            return ws
        session.subscribers.append(ws)
        await ws.send_str(json.dumps(session.tick_message(), sort_keys=True))
        try:
            async for msg in ws:
                if msg.type != WSMsgType.TEXT:
                    continue
                try:
                    data = json.loads(msg.data)
                    await session.apply(data)
                except (ValueError, KeyError, TypeError) as exc:
                    await ws.send_str(json.dumps(
                        {"kind": "error", "code": "malformed_message",
                         "message": str(exc)}))
        finally:
            if ws in session.subscribers:
                session.subscribers.remove(ws)
        return ws

    app.router.add_get("/maps", maps)
    app.router.add_post("/sessions", create)
    app.router.add_get("/sessions/{sid}/posterior.pgm", posterior)
    app.router.add_get("/session/{sid}", socket)
    return app


def serve(scenario_dir: str | Path, host: str = "127.0.0.1", port: int = 8750,
          ticks_per_call: int = 1) -> None:
    app = make_app(scenario_dir, ticks_per_call)
    log.info("serving %s on %s:%d", scenario_dir, host, port)
    web.run_app(app, host=host, port=port)
