"""Wire schema for the realtime steering channel.

Every frame is one JSON object per line (or per websocket message). The
server speaks tick/attempt-end/histogram/session-end, the client speaks
steer plus a small set of session controls. Keys are sorted and separators
fixed so identical payloads always serialize to identical bytes.
"""
from __future__ import annotations

import json

from .engine import Attempt, Steering

PROTOCOL_VERSION = 1

SERVER_TYPES = ("welcome", "tick", "attempt-end", "histogram", "session-end",
                "error")
CLIENT_TYPES = ("steer", "start", "start-attempt", "toggle-warmup", "end")


class MessageError(ValueError):
    """A frame that does not parse or does not fit the schema."""


def encode(message: dict) -> str:
    return json.dumps(message, sort_keys=True, separators=(",", ":"))


def decode(text: str) -> dict:
    try:
        message = json.loads(text)
    except json.JSONDecodeError as err:
        raise MessageError(f"unparseable frame: {err}") from err
    if not isinstance(message, dict) or not isinstance(message.get("type"), str):
        raise MessageError("frame is not an object with a type field")
    return message


def parse_client_message(text: str) -> tuple[str, Steering | None]:
    """Validate a client frame; returns (kind, steering-or-None)."""
    message = decode(text)
    kind = message["type"]
    if kind not in CLIENT_TYPES:
        raise MessageError(f"unknown client message type {kind!r}")
    if kind != "steer":
        return kind, None
    try:
        steering = Steering(message.get("direction"))
    except ValueError as err:
        raise MessageError(f"bad steer direction: {err}") from err
    return kind, steering


def welcome_message(config_dict: dict, attempts: int) -> dict:
    return {"type": "welcome", "version": PROTOCOL_VERSION,
            "config": config_dict, "attempts": attempts}


def tick_message(seq: int, tick: int, state, revealed, warmup: bool,
                 remaining: int) -> dict:
    return {
        "type": "tick",
        "seq": seq,
        "tick": tick,
        "x": state.x,
        "y": state.y,
        "phase": state.phase.value,
        "channel": state.channel,
        "revealed": [[x, y] for x, y in revealed],
        "warmup": warmup,
        "remaining": remaining,
    }


def attempt_end_message(attempt: Attempt, remaining: int) -> dict:
    return {
        "type": "attempt-end",
        "seq": attempt.seq,
        "outcome": attempt.outcome.value,
        "channel": attempt.channel,
        "touched": attempt.touched_mushroom,
        "excluded": attempt.excluded,
        "remaining": remaining,
    }


def histogram_message(bins, registered: int) -> dict:
    return {"type": "histogram", "bins": [int(b) for b in bins],
            "registered": registered}


def session_end_message(total: int, path) -> dict:
    return {"type": "session-end", "total": total,
            "path": str(path) if path is not None else None}


def error_message(reason: str) -> dict:
    return {"type": "error", "reason": reason}


def steer_message(direction: Steering) -> dict:
    return {"type": "steer", "direction": direction.value}


def control_message(kind: str) -> dict:
    if kind not in CLIENT_TYPES or kind == "steer":
        raise MessageError(f"not a control message type: {kind!r}")
    return {"type": kind}
