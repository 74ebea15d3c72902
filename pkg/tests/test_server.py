import asyncio
import json

import pytest

from slitforest.engine import WorldConfig
from slitforest.physics import Screen
from slitforest.recording import read_session, replay
from slitforest.server import (
    InMemoryConnection,
    StreamConnection,
    WebSocketConnection,
    serve_session,
    serve_tcp,
    serve_websocket,
)


def encode(msg):
    return json.dumps(msg, sort_keys=True, separators=(",", ":"))


async def drive(conn, plan):
    """Run a scripted client; plan(msg, seen) -> reply dict | 'CLOSE' | None."""
    seen = []
    while True:
        raw = await conn.recv()
        if raw is None:
            return seen
        msg = json.loads(raw)
        seen.append(msg)
        reply = plan(msg, seen)
        if reply == "CLOSE":
            await conn.close()
            return seen
        if reply is not None:
            await conn.send(encode(reply))


def no_input_plan(msg, seen):
    t = msg["type"]
    if t == "welcome":
        return {"type": "start"}
    if t == "tick" and msg["phase"] == "in_flight":
        return {"type": "steer", "direction": "none"}
    if t == "attempt-end" and msg["remaining"] > 0:
        return {"type": "start-attempt"}
    return None


def steer_plan(target_x, slit_x, ls=0.75):
    def plan(msg, seen):
        t = msg["type"]
        if t == "welcome":
            return {"type": "start"}
        if t == "tick" and msg["phase"] == "in_flight":
            waypoint = slit_x if msg["y"] < 0 else target_x
            dx = waypoint - msg["x"]
            if dx >= ls / 2:
                direction = "right"
            elif dx <= -ls / 2:
                direction = "left"
            else:
                direction = "none"
            return {"type": "steer", "direction": direction}
        if t == "attempt-end" and msg["remaining"] > 0:
            return {"type": "start-attempt"}
        return None
    return plan


def run_session(config, plan, **kwargs):
    async def main():
        server_conn, client_conn = InMemoryConnection.pair()
        return await asyncio.gather(
            serve_session(config, server_conn, tick_rate=0, **kwargs),
            drive(client_conn, plan),
        )
    return asyncio.run(main())


def one_slit_config(**kw):
    kw.setdefault("mushroom_count", 0)
    return WorldConfig(screen=Screen.ONE_SLIT_CENTER, **kw)


def test_no_input_session_lands_every_attempt_in_center(tmp_path):
    config = one_slit_config(rng_seed=1)
    served, seen = run_session(config, no_input_plan, attempts=100,
                               data_dir=tmp_path, session_name="s.jsonl")
    assert served.completed == 100
    assert served.path == tmp_path / "s.jsonl"

    record = read_session(served.path)
    assert record.counts == {"registered": 100, "excluded": 0, "blocked": 0,
                             "missed": 0, "total": 100}
    replayed = replay(served.path)
    assert all(a.channel == 32 for a in replayed.attempts)

    histograms = [m for m in seen if m["type"] == "histogram"]
    assert len(histograms) == 1
    assert histograms[0]["bins"][31] == 100
    assert histograms[0]["registered"] == 100
    assert seen[-1]["type"] == "session-end"
    assert seen[-1]["total"] == 100


def test_steered_session_reaches_side_channel(tmp_path):
    config = WorldConfig(screen=Screen.TWO_SLIT, mushroom_count=0, rng_seed=2)
    served, seen = run_session(config, steer_plan(target_x=7.0, slit_x=7.0),
                               attempts=3, data_dir=tmp_path,
                               session_name="s.jsonl")
    ends = [m for m in seen if m["type"] == "attempt-end"]
    assert [m["channel"] for m in ends] == [39, 39, 39]
    assert all(m["outcome"] == "registered" for m in ends)
    assert read_session(served.path).counts["registered"] == 3


def test_tick_stream_is_strictly_ordered(tmp_path):
    config = one_slit_config(rng_seed=3)
    _, seen = run_session(config, no_input_plan, attempts=5,
                          data_dir=tmp_path, session_name="s.jsonl")
    ticks = [(m["seq"], m["tick"]) for m in seen if m["type"] == "tick"]
    assert ticks == sorted(ticks)
    for seq in {s for s, _ in ticks}:
        indices = [t for s, t in ticks if s == seq]
        assert indices == list(range(len(indices)))


def test_live_seed_differs_from_warmup_field(tmp_path):
    config = one_slit_config(rng_seed=7, mushroom_count=10, warmup=True)
    warmup_ticks = []

    def plan(msg, seen):
        t = msg["type"]
        if t == "tick" and msg["warmup"]:
            warmup_ticks.append(msg)
            if len(warmup_ticks) == 5:
                return {"type": "start"}
            return {"type": "steer", "direction": "none"}
        return no_input_plan(msg, seen)

    served, seen = run_session(config, plan, attempts=4,
                               data_dir=tmp_path, session_name="s.jsonl")
    assert served.completed == 4
    # practice ticks show the whole field; live ticks hide untouched mushrooms
    assert all(len(m["revealed"]) == 10 for m in warmup_ticks)
    live_ticks = [m for m in seen if m["type"] == "tick" and not m["warmup"]]
    assert live_ticks and all(m["revealed"] == [] for m in live_ticks)

    record = read_session(served.path)
    assert record.config.rng_seed != config.rng_seed
    assert not record.config.warmup
    assert replay(served.path).attempts == tuple(served.session.attempts)


def test_disconnect_mid_attempt_leaves_valid_file(tmp_path):
    config = one_slit_config(rng_seed=4)

    def plan(msg, seen):
        if msg["type"] == "tick" and msg["seq"] == 2 and msg["tick"] == 5:
            return "CLOSE"
        return no_input_plan(msg, seen)

    served, _ = run_session(config, plan, attempts=5,
                            data_dir=tmp_path, session_name="s.jsonl")
    assert served.completed == 2
    record = read_session(served.path)
    assert not record.recovered
    assert record.counts["total"] == 2
    last = record.attempts[-1]
    assert last.outcome.value == "missed"
    assert last.disconnected
    assert last.excluded
    assert len(last.input_log) == 5
    # the truncated input log still replays deterministically
    assert replay(served.path).attempts == record.attempts


def test_end_between_attempts_stops_early(tmp_path):
    config = one_slit_config(rng_seed=5)

    def plan(msg, seen):
        if msg["type"] == "attempt-end":
            return {"type": "end"}
        return no_input_plan(msg, seen)

    served, seen = run_session(config, plan, attempts=10,
                               data_dir=tmp_path, session_name="s.jsonl")
    assert served.completed == 1
    assert read_session(served.path).counts["total"] == 1
    assert seen[-1]["type"] == "session-end"
    assert seen[-1]["total"] == 1


def test_end_before_start_leaves_no_file(tmp_path):
    config = one_slit_config(rng_seed=6)

    def plan(msg, seen):
        if msg["type"] == "welcome":
            return {"type": "end"}
        return None

    served, seen = run_session(config, plan, attempts=5, data_dir=tmp_path)
    assert served.path is None
    assert served.completed == 0
    assert list(tmp_path.iterdir()) == []


def test_malformed_frame_gets_error_and_flight_continues(tmp_path):
    config = one_slit_config(rng_seed=8)
    injected = []

    def plan(msg, seen):
        if msg["type"] == "tick" and msg["tick"] == 3 and not injected:
            injected.append(True)
            return {"type": "steer", "direction": "up"}
        return no_input_plan(msg, seen)

    served, seen = run_session(config, plan, attempts=1,
                               data_dir=tmp_path, session_name="s.jsonl")
    assert served.completed == 1
    assert any(m["type"] == "error" for m in seen)
    assert read_session(served.path).counts["registered"] == 1


def test_tcp_transport_round_trip(tmp_path):
    config = one_slit_config(rng_seed=9)

    async def main():
        server = await serve_tcp(config, port=0, attempts=2,
                                 data_dir=tmp_path, session_name="s.jsonl",
                                 tick_rate=0)
        port = server.sockets[0].getsockname()[1]
        reader, writer = await asyncio.open_connection("127.0.0.1", port)
        seen = await drive(StreamConnection(reader, writer), no_input_plan)
        server.close()
        await server.wait_closed()
        return seen

    seen = asyncio.run(main())
    assert seen[-1]["type"] == "session-end"
    assert read_session(tmp_path / "s.jsonl").counts["registered"] == 2


def test_websocket_transport_round_trip(tmp_path):
    websockets = pytest.importorskip("websockets")
    config = one_slit_config(rng_seed=10)

    async def main():
        server = await serve_websocket(config, port=0, attempts=2,
                                       data_dir=tmp_path,
                                       session_name="s.jsonl", tick_rate=0)
        port = server.sockets[0].getsockname()[1]
        async with websockets.connect(f"ws://127.0.0.1:{port}") as ws:
            seen = await drive(WebSocketConnection(ws), no_input_plan)
        server.close()
        await server.wait_closed()
        return seen

    seen = asyncio.run(main())
    assert seen[-1]["type"] == "session-end"
    assert read_session(tmp_path / "s.jsonl").counts["registered"] == 2
