import asyncio
import base64
import json
import math
from pathlib import Path

import pytest
from aiohttp.test_utils import TestClient, TestServer

from borderforge.cli import main
from borderforge.scenario import load_scenario
from borderforge.service import make_app


def run(coro):
    return asyncio.new_event_loop().run_until_complete(coro)


async def with_client(scenario_dir, fn):
    app = make_app(scenario_dir)
    client = TestClient(TestServer(app))
    await client.start_server()
    try:
        return await fn(client)
    finally:
        await client.close()


def test_maps_listing(tiny_world):
    async def fn(client):
        resp = await client.get("/maps")
        assert resp.status == 200
        entries = await resp.json()
        assert [e["id"] for e in entries] == ["tiny"]

    run(with_client(tiny_world.parent, fn))


def test_create_session_unknown_map(tiny_world):
    async def fn(client):
        resp = await client.post("/sessions", json={"map": "nope"})
        assert resp.status == 404
        body = await resp.json()
        assert "nope" in body["error"]

    run(with_client(tiny_world.parent, fn))


def test_sessions_are_isolated(tiny_world):
    async def fn(client):
        a = await (await client.post("/sessions", json={"map": "tiny",
                                                        "lockstep": True})).json()
        b = await (await client.post("/sessions", json={"map": "tiny",
                                                        "lockstep": True})).json()
        assert a["session"] != b["session"]
        ws_a = await client.ws_connect(f"/session/{a['session']}")
        ws_b = await client.ws_connect(f"/session/{b['session']}")
        await ws_a.receive_json()
        await ws_b.receive_json()
        # drive only session a
        await ws_a.send_json({"kind": "event", "event": "next"})
        await ws_a.send_json({"kind": "advance", "ticks": 1})
        tick_a = await ws_a.receive_json()
        assert tick_a["state"] == "record"
        await ws_b.send_json({"kind": "advance", "ticks": 1})
        tick_b = await ws_b.receive_json()
        assert tick_b["state"] == "start"
        await ws_a.close()
        await ws_b.close()

    run(with_client(tiny_world.parent, fn))


def test_event_next_switches_to_record_with_red_led(tiny_world):
    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny", "lockstep": True})).json()
        ws = await client.ws_connect(f"/session/{created['session']}")
        first = await ws.receive_json()
        assert first["kind"] == "tick" and first["led"] == "green"
        await ws.send_json({"kind": "event", "event": "next"})
        await ws.send_json({"kind": "advance", "ticks": 1})
        tick = await ws.receive_json()
        assert tick["state"] == "record"
        assert tick["led"] == "red"
        assert tick.get("beep") is True
        await ws.close()

    run(with_client(tiny_world.parent, fn))


def test_malformed_message_reports_error_and_session_survives(tiny_world):
    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny", "lockstep": True})).json()
        ws = await client.ws_connect(f"/session/{created['session']}")
        await ws.receive_json()
        await ws.send_str("{this is not json")
        err = await ws.receive_json()
        assert err["kind"] == "error" and err["code"] == "malformed_message"
        await ws.send_json({"kind": "launder", "x": 1})
        err = await ws.receive_json()
        assert err["kind"] == "error"
        await ws.send_json({"kind": "advance", "ticks": 1})
        tick = await ws.receive_json()
        assert tick["kind"] == "tick"
        await ws.close()

    run(with_client(tiny_world.parent, fn))


def test_set_laser_rejects_out_of_range(tiny_world):
    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny", "lockstep": True})).json()
        ws = await client.ws_connect(f"/session/{created['session']}")
        await ws.receive_json()
        await ws.send_json({"kind": "set_laser", "x_norm": 1.4, "y_norm": 0.2})
        err = await ws.receive_json()
        assert err["kind"] == "error"
        await ws.close()

    run(with_client(tiny_world.parent, fn))


def test_spot_loss_halts_robot_after_half_second(tiny_world):
    scenario = load_scenario(tiny_world)
    dt = scenario.dt

    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny", "lockstep": True})).json()
        ws = await client.ws_connect(f"/session/{created['session']}")
        await ws.receive_json()
        # park the spot ahead of the robot and let it drive
        grid_w = 120 * 0.025
        grid_h = 90 * 0.025
        await ws.send_json({"kind": "set_laser",
                            "x_norm": 2.2 / grid_w, "y_norm": 0.6 / grid_h})
        await ws.send_json({"kind": "advance", "ticks": 10})
        ticks = [await ws.receive_json() for _ in range(10)]
        moving = ticks[-1]["pose"]
        assert moving[0] > ticks[0]["pose"][0]  # it drove forward
        # switch the pointer off: robot holds ~0.5 s, then halts
        await ws.send_json({"kind": "set_laser", "off": True})
        hold_ticks = int(0.5 / dt) + 2
        await ws.send_json({"kind": "advance", "ticks": hold_ticks + 10})
        frames = [await ws.receive_json() for _ in range(hold_ticks + 10)]
        late = [f["pose"] for f in frames[hold_ticks + 2:]]
        for a, b in zip(late, late[1:]):
            assert a == b  # fully stopped
        await ws.close()

    run(with_client(tiny_world.parent, fn))


def drive_lockstep_equivalence(tiny_world: Path, out_dir: Path) -> tuple[bytes, bytes]:
    """Replay the scenario's script through the protocol; return (service
    posterior bytes, headless posterior bytes)."""
    scenario = load_scenario(tiny_world)
    grid_w = 120 * 0.025
    grid_h = 90 * 0.025
    n_ticks = round(scenario.duration / scenario.dt)

    assert main(["run", str(tiny_world), "--out", str(out_dir)]) == 0
    headless = (out_dir / "posterior.pgm").read_bytes()

    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny", "lockstep": True})).json()
        sid = created["session"]
        ws = await client.ws_connect(f"/session/{sid}")
        await ws.receive_json()
        pending_events = list(scenario.events)
        laser_state = ("unset",)
        for k in range(n_ticks):
            t = k * scenario.dt
            while pending_events and pending_events[0].t <= t + 1e-9:
                ev = pending_events.pop(0)
                await ws.send_json({"kind": "event", "event": ev.event.value})
            spot = scenario.laser_at(t)
            if spot is None:
                if laser_state != ("off",):
                    await ws.send_json({"kind": "set_laser", "off": True})
                    laser_state = ("off",)
            else:
                await ws.send_json({"kind": "set_laser",
                                    "x_norm": spot[0] / grid_w,
                                    "y_norm": spot[1] / grid_h})
                laser_state = ("on", spot)
            await ws.send_json({"kind": "advance", "ticks": 1})
            msg = await ws.receive_json()
            while msg["kind"] != "tick":
                msg = await ws.receive_json()
        await ws.close()
        resp = await client.get(f"/sessions/{sid}/posterior.pgm")
        assert resp.status == 200
        return await resp.read()

    service_bytes = run(with_client(tiny_world.parent, fn))
    return service_bytes, headless


def test_scripted_client_matches_headless_run(tiny_world, tmp_path):
    service_bytes, headless_bytes = drive_lockstep_equivalence(
        tiny_world, tmp_path / "headless")
    assert service_bytes == headless_bytes


def test_request_map_returns_base64_pgm(tiny_world):
    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny", "lockstep": True})).json()
        ws = await client.ws_connect(f"/session/{created['session']}")
        await ws.receive_json()
        await ws.send_json({"kind": "request_map", "which": "prior"})
        msg = await ws.receive_json()
        assert msg["kind"] == "map" and msg["which"] == "prior"
        payload = base64.b64decode(msg["pgm"])
        assert payload.startswith(b"P5\n120 90\n255\n")
        assert "resolution: 0.025" in msg["meta"]
        await ws.close()

    run(with_client(tiny_world.parent, fn))


def test_rotate_command_turns_robot_in_keep_off(tiny_world):
    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny", "lockstep": True})).json()
        ws = await client.ws_connect(f"/session/{created['session']}")
        await ws.receive_json()
        await ws.send_json({"kind": "event", "event": "next"})
        await ws.send_json({"kind": "event", "event": "next"})
        await ws.send_json({"kind": "rotate", "target_yaw": math.pi / 2})
        await ws.send_json({"kind": "advance", "ticks": 60})
        last = None
        for _ in range(60):
            last = await ws.receive_json()
        assert last["state"] == "keep_off"
        assert abs(last["pose"][2] - math.pi / 2) < 0.05
        await ws.close()

    run(with_client(tiny_world.parent, fn))


def test_reset_restores_spawn_and_start_state(tiny_world):
    from borderforge.scenario import load_scenario as _load
    spawn = _load(tiny_world).spawn

    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny", "lockstep": True})).json()
        ws = await client.ws_connect(f"/session/{created['session']}")
        await ws.receive_json()
        await ws.send_json({"kind": "event", "event": "next"})
        await ws.send_json({"kind": "advance", "ticks": 5})
        for _ in range(5):
            await ws.receive_json()
        await ws.send_json({"kind": "reset"})
        await ws.send_json({"kind": "advance", "ticks": 1})
        tick = await ws.receive_json()
        assert tick["state"] == "start"
        assert tick["time"] == pytest.approx(0.05)
        assert tick["pose"][0] == pytest.approx(spawn.x)
        assert tick["pose"][1] == pytest.approx(spawn.y)
        await ws.close()

    run(with_client(tiny_world.parent, fn))


def test_realtime_session_streams_ticks_and_rejects_advance(tiny_world):
    async def fn(client):
        created = await (await client.post(
            "/sessions", json={"map": "tiny"})).json()   # realtime, no lockstep
        ws = await client.ws_connect(f"/session/{created['session']}")
        times = []
        while len(times) < 6:
            msg = await ws.receive_json()
            if msg["kind"] == "tick":
                times.append(msg["time"])
        assert all(b > a for a, b in zip(times, times[1:]))
        await ws.send_json({"kind": "advance", "ticks": 3})
        while True:
            msg = await ws.receive_json()
            if msg["kind"] == "error":
                assert "lockstep" in msg["message"]
                break
        await ws.close()

    run(with_client(tiny_world.parent, fn))
