"""Lockstep realtime server for live steering sessions.

Each connection hosts one session. The loop is strictly alternating: the
server sends a tick frame, the client answers with exactly one frame, the
engine advances one tick. Terminal ticks and attempt-end frames close each
flight; the client acks the attempt-end to start the next one. Determinism
is therefore over tick indices, never wall time; the pacer only slows the
exchange down for human play.

The client reply contract: one frame per in-flight tick, one frame per
attempt-end, nothing in response to a terminal tick or any other frame.
"""
from __future__ import annotations

import asyncio
import logging
import os
import random
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from functools import partial
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import protocol
from .analytics import Session, build_histogram
from .engine import Engine, Phase, Steering, WorldConfig
from .protocol import MessageError, encode
from .recording import SessionWriter, config_to_dict

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "SLITFOREST_DATA_DIR"
DEFAULT_TICK_RATE = 30.0
DEFAULT_ATTEMPTS = 100


def default_data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "."))


class InMemoryConnection:
    """Queue-backed duplex endpoint; tests link a server/client pair."""

    def __init__(self, inbox: asyncio.Queue, outbox: asyncio.Queue):
        self._inbox = inbox
        self._outbox = outbox
        self._closed = False
        self._eof = False

    @classmethod
    def pair(cls) -> tuple["InMemoryConnection", "InMemoryConnection"]:
        a: asyncio.Queue = asyncio.Queue()
        b: asyncio.Queue = asyncio.Queue()
        return cls(a, b), cls(b, a)

    async def send(self, text: str) -> None:
        if not self._closed:
            await self._outbox.put(text)

    async def recv(self) -> str | None:
        if self._eof:
            return None
        item = await self._inbox.get()
        if item is None:
            self._eof = True
        return item

    async def close(self) -> None:
        if not self._closed:
            self._closed = True
            await self._outbox.put(None)


class StreamConnection:
    """Newline-delimited frames over an asyncio TCP stream."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self._reader = reader
        self._writer = writer

    async def send(self, text: str) -> None:
        self._writer.write(text.encode("utf-8") + b"\n")
        await self._writer.drain()

    async def recv(self) -> str | None:
        line = await self._reader.readline()
        if not line:
            return None
        return line.decode("utf-8").rstrip("\r\n")

    async def close(self) -> None:
        try:
            self._writer.close()
            await self._writer.wait_closed()
        except (ConnectionError, OSError):
            pass


class WebSocketConnection:
    """One frame per websocket message."""

    def __init__(self, ws):
        self._ws = ws

    async def send(self, text: str) -> None:
        await self._ws.send(text)

    async def recv(self) -> str | None:
        try:
            frame = await self._ws.recv()
        except Exception:
            return None
        return frame if isinstance(frame, str) else frame.decode("utf-8")

    async def close(self) -> None:
        try:
            await self._ws.close()
        except Exception:
            pass


class _Pacer:
    """Caps the tick exchange at a fixed rate; rate 0 runs uncapped."""

    def __init__(self, rate: float):
        self.interval = 1.0 / rate if rate > 0 else 0.0
        self._next: float | None = None

    async def wait(self) -> None:
        if not self.interval:
            return
        now = asyncio.get_running_loop().time()
        if self._next is None:
            self._next = now
        if self._next > now:
            await asyncio.sleep(self._next - now)
            self._next += self.interval
        else:
            self._next = now + self.interval


@dataclass(frozen=True)
class ServedSession:
    """What a finished (or aborted) connection produced."""

    path: Path | None
    session: Session | None
    completed: int


async def _send(conn, message: dict) -> None:
    await conn.send(encode(message))


def _revealed(engine: Engine, warmup: bool):
    if warmup:
        return [(float(x), float(y)) for x, y in engine.field.positions]
    return [(float(x), float(y)) for x, y in engine.field.revealed]


async def _run_attempt(engine: Engine, conn, pacer: _Pacer, warmup: bool,
                       remaining: int):
    """Drive one flight in lockstep.

    Returns (status, attempt-or-None): "attempt" for a normal landing,
    "disconnect"/"end-flight" with the aborted attempt in live mode, or
    "control" with the control kind when a warmup flight is abandoned.
    """
    run = engine.begin_attempt()
    while run.state.phase is Phase.IN_FLIGHT:
        await pacer.wait()
        await _send(conn, protocol.tick_message(
            run.seq, run.tick_index, run.state,
            _revealed(engine, warmup), warmup, remaining))
        raw = await conn.recv()
        if raw is None:
            run.abort()
            return "disconnect", run.finish()
        try:
            kind, steering = protocol.parse_client_message(raw)
        except MessageError as err:
            await _send(conn, protocol.error_message(str(err)))
            kind, steering = "steer", Steering.NONE
        if kind in ("start", "toggle-warmup", "end"):
            if warmup:
                return "control", kind
            if kind == "end":
                # the client walked away mid-flight; the attempt is lost
                run.abort()
                return "end-flight", run.finish()
            await _send(conn, protocol.error_message(
                f"{kind} is not valid during a live flight"))
            steering = Steering.NONE
        elif kind == "start-attempt":
            steering = Steering.NONE
        run.step(steering)
    # terminal tick shows the landing; the client does not reply to it
    await _send(conn, protocol.tick_message(
        run.seq, run.tick_index, run.state,
        _revealed(engine, warmup), warmup, remaining))
    return "attempt", run.finish()


async def _await_ack(conn) -> str:
    """One client frame acknowledging an attempt-end."""
    raw = await conn.recv()
    if raw is None:
        return "disconnect"
    try:
        kind, _ = protocol.parse_client_message(raw)
    except MessageError as err:
        await _send(conn, protocol.error_message(str(err)))
        return "ack"
    if kind == "end":
        return "end"
    if kind in ("start", "toggle-warmup"):
        await _send(conn, protocol.error_message(
            f"{kind} is not valid between live attempts"))
    return "ack"


async def serve_session(config: WorldConfig, conn, *,
                        attempts: int = DEFAULT_ATTEMPTS,
                        data_dir=None,
                        session_name: str | None = None,
                        subject: dict | None = None,
                        tick_rate: float = DEFAULT_TICK_RATE) -> ServedSession:
    """Host one session over an established connection.

    Warm-up flights (mushrooms visible) run until the client sends start;
    the live run then gets a fresh seed drawn from the session's seed
    stream, so its mushroom field never depends on warm-up play. Every
    live attempt is persisted as it completes; a lost connection leaves a
    valid record file with the in-flight attempt marked missed.
    """
    pacer = _Pacer(tick_rate)
    await _send(conn, protocol.welcome_message(config_to_dict(config), attempts))
    seed_stream = random.Random(config.rng_seed)

    mode = "warmup" if config.warmup else "lobby"
    warm_engine: Engine | None = None
    while True:
        if mode == "lobby":
            raw = await conn.recv()
            if raw is None:
                return ServedSession(None, None, 0)
            try:
                kind, _ = protocol.parse_client_message(raw)
            except MessageError as err:
                await _send(conn, protocol.error_message(str(err)))
                continue
            if kind == "start":
                break
            if kind == "toggle-warmup":
                mode = "warmup"
                continue
            if kind == "end":
                await _send(conn, protocol.session_end_message(0, None))
                await conn.close()
                return ServedSession(None, None, 0)
            await _send(conn, protocol.error_message(
                f"{kind} ignored before the session starts"))
        else:
            if warm_engine is None:
                warm_engine = Engine(replace(config, warmup=True))
            status, payload = await _run_attempt(
                warm_engine, conn, pacer, warmup=True, remaining=attempts)
            if status == "disconnect":
                return ServedSession(None, None, 0)
            if status == "control":
                if payload == "start":
                    break
                if payload == "toggle-warmup":
                    mode = "lobby"
                    warm_engine = None
                    continue
                await conn.close()
                return ServedSession(None, None, 0)
            # a finished practice flight is reported but never recorded
            await _send(conn, protocol.attempt_end_message(payload, attempts))
            ack = await _await_ack(conn)
            if ack == "disconnect":
                return ServedSession(None, None, 0)
            if ack == "end":
                await conn.close()
                return ServedSession(None, None, 0)

    live_seed = seed_stream.getrandbits(64)
    live_config = replace(config, rng_seed=live_seed, warmup=False)
    engine = Engine(live_config)
    directory = Path(data_dir) if data_dir is not None else default_data_dir()
    directory.mkdir(parents=True, exist_ok=True)
    if session_name is None:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%f")
        session_name = f"session-{stamp}-{live_seed:016x}.jsonl"
    writer = SessionWriter(directory / session_name, live_config, subject)

    recorded: list = []
    disconnected = False
    for index in range(attempts):
        status, attempt = await _run_attempt(
            engine, conn, pacer, warmup=False, remaining=attempts - index)
        writer.add(attempt)
        recorded.append(attempt)
        if status == "disconnect":
            disconnected = True
            break
        await _send(conn, protocol.attempt_end_message(
            attempt, attempts - index - 1))
        if status == "end-flight":
            break
        if index + 1 < attempts:
            ack = await _await_ack(conn)
            if ack == "disconnect":
                disconnected = True
                break
            if ack == "end":
                break

    writer.finalize()
    session = Session(
        id=writer.path.stem,
        config=live_config,
        attempts=tuple(recorded),
        subject=dict(subject or {}),
        created_at=writer.created_at,
    )
    if not disconnected:
        histogram = build_histogram(session)
        await _send(conn, protocol.histogram_message(
            histogram.bins, histogram.n_attempts_registered))
        await _send(conn, protocol.session_end_message(
            len(recorded), writer.path))
        await conn.close()
    return ServedSession(writer.path, session, len(recorded))


async def serve_tcp(config: WorldConfig, host: str = "127.0.0.1",
                    port: int = 0, **session_kwargs):
    """Listen for TCP clients; each connection hosts one session."""

    async def handler(reader, writer):
        conn = StreamConnection(reader, writer)
        try:
            await serve_session(config, conn, **session_kwargs)
        except (ConnectionError, asyncio.IncompleteReadError):
            logger.info("connection lost")
        finally:
            await conn.close()

    return await asyncio.start_server(handler, host, port)


async def serve_websocket(config: WorldConfig, host: str = "127.0.0.1",
                          port: int = 0, **session_kwargs):
    """Listen for websocket clients; each connection hosts one session."""
    import websockets

    async def handler(ws):
        conn = WebSocketConnection(ws)
        try:
            await serve_session(config, conn, **session_kwargs)
        finally:
            await conn.close()

    return await websockets.serve(handler, host, port)


def start_static_server(directory, host: str = "127.0.0.1", port: int = 0):
    """Serve the UI bundle from a directory on a daemon thread."""
    handler = partial(SimpleHTTPRequestHandler, directory=str(directory))
    httpd = ThreadingHTTPServer((host, port), handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    return httpd
