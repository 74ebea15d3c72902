"""Append-only session record files and deterministic replay.

A session file is line-delimited JSON: one header line, one line per
attempt, one trailing summary line. Attempt lines are hashed so the summary
can certify them; the header line is outside the hash because it carries
the creation timestamp. Files remain readable without a summary so a crash
mid-session loses at most the final partial line.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .analytics import Session
from .engine import Attempt, Engine, Phase, Steering, WorldConfig
from .physics import Geometry, Screen

FORMAT_VERSION = 1


class RecordError(ValueError):
    """Base class for unreadable or inconsistent session files."""


class VersionError(RecordError):
    """The file declares a format version this reader does not speak."""


class SummaryMismatchError(RecordError):
    """Summary counts disagree with the attempt records."""


class ChecksumError(RecordError):
    """Attempt bytes do not hash to the summary checksum."""


class ReplayMismatchError(RecordError):
    """Re-running the recorded inputs produced different outcomes."""


def rle_encode(inputs) -> list:
    """Run-length encode a steering sequence as [value, count] pairs."""
    runs = []
    for step in inputs:
        value = step.value
        if runs and runs[-1][0] == value:
            runs[-1][1] += 1
        else:
            runs.append([value, 1])
    return runs


def rle_decode(runs) -> tuple:
    out = []
    for value, count in runs:
        out.extend([Steering(value)] * count)
    return tuple(out)


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_to_dict(config: WorldConfig) -> dict:
    g = config.geometry
    return {
        "geometry": {
            "t": g.t, "w": g.w, "lambda": g.lam, "d": g.d, "D": g.D,
            "s": g.s, "n_channels": g.n_channels,
            "slit_centers": list(g.slit_centers),
        },
        "screen": config.screen.value,
        "mushroom_count": config.mushroom_count,
        "mushroom_radius": config.mushroom_radius,
        "lateral_speed": config.lateral_speed,
        "vertical_speed": config.vertical_speed,
        "rng_seed": config.rng_seed,
        "warmup": config.warmup,
        "trajectory_stride": config.trajectory_stride,
    }


def config_from_dict(data: dict) -> WorldConfig:
    gd = data["geometry"]
    geometry = Geometry(
        t=gd["t"], w=gd["w"], lam=gd["lambda"], d=gd["d"], D=gd["D"],
        s=gd["s"], n_channels=gd["n_channels"],
        slit_centers=tuple(gd["slit_centers"]),
    )
    return WorldConfig(
        geometry=geometry,
        screen=Screen(data["screen"]),
        mushroom_count=data["mushroom_count"],
        mushroom_radius=data["mushroom_radius"],
        lateral_speed=data["lateral_speed"],
        vertical_speed=data["vertical_speed"],
        rng_seed=data["rng_seed"],
        warmup=data["warmup"],
        trajectory_stride=data["trajectory_stride"],
    )


def attempt_to_dict(attempt: Attempt) -> dict:
    record = {
        "seq": attempt.seq,
        "outcome": attempt.outcome.value,
        "channel": attempt.channel,
        "touched": attempt.touched_mushroom,
        "excluded": attempt.excluded,
        "inputs": rle_encode(attempt.input_log),
    }
    if attempt.trajectory:
        record["trajectory"] = [[x, y] for x, y in attempt.trajectory]
    if attempt.disconnected:
        record["disconnected"] = True
    return record


def attempt_from_dict(data: dict, screen: Screen) -> Attempt:
    return Attempt(
        seq=data["seq"],
        screen=screen,
        outcome=Phase(data["outcome"]),
        channel=data["channel"],
        touched_mushroom=data["touched"],
        excluded=data["excluded"],
        trajectory=tuple((x, y) for x, y in data.get("trajectory", [])),
        input_log=rle_decode(data["inputs"]),
        disconnected=data.get("disconnected", False),
    )


def _count_outcomes(attempts) -> dict:
    counts = {"registered": 0, "excluded": 0, "blocked": 0, "missed": 0,
              "total": len(attempts)}
    for a in attempts:
        if a.outcome is Phase.REGISTERED:
            counts["registered"] += 1
        elif a.outcome is Phase.BLOCKED:
            counts["blocked"] += 1
        else:
            counts["missed"] += 1
        counts["excluded"] += a.excluded
    return counts


class SessionWriter:
    """Streams a session to disk, one flushed line per attempt."""

    def __init__(self, path, config: WorldConfig, subject: dict | None = None,
                 created_at: str | None = None):
        self.path = Path(path)
        self.config = config
        self.created_at = created_at or datetime.now(timezone.utc).isoformat()
        self._attempts = []
        self._hash = hashlib.sha256()
        self._fh = open(self.path, "w", encoding="utf-8")
        header = {
            "kind": "header",
            "version": FORMAT_VERSION,
            "config": config_to_dict(config),
            "subject": dict(subject or {}),
            "created_at": self.created_at,
        }
        self._fh.write(_dump(header) + "\n")
        self._fh.flush()

    def add(self, attempt: Attempt) -> None:
        line = _dump({"kind": "attempt", **attempt_to_dict(attempt)}) + "\n"
        self._hash.update(line.encode("utf-8"))
        self._fh.write(line)
        self._fh.flush()
        self._attempts.append(attempt)

    def finalize(self) -> dict:
        summary = {
            "kind": "summary",
            "counts": _count_outcomes(self._attempts),
            "checksum": self._hash.hexdigest(),
        }
        self._fh.write(_dump(summary) + "\n")
        self._fh.close()
        return summary

    def abandon(self) -> None:
        """Close without a summary; the file stays readable as recovered."""
        self._fh.close()


def write_session(session: Session, path) -> Path:
    writer = SessionWriter(path, session.config, session.subject,
                           created_at=session.created_at)
    for attempt in session.attempts:
        writer.add(attempt)
    writer.finalize()
    return Path(path)


@dataclass(frozen=True)
class SessionRecord:
    """A parsed session file, verified as far as its summary allows."""

    path: Path
    version: int
    config: WorldConfig
    subject: dict
    created_at: str
    attempts: tuple[Attempt, ...]
    counts: dict
    checksum: str
    recovered: bool

    def to_session(self) -> Session:
        return Session(
            id=self.path.stem,
            config=self.config,
            attempts=self.attempts,
            subject=self.subject,
            created_at=self.created_at,
        )


def read_session(path) -> SessionRecord:
    """Parse and verify a session file.

    Checks run in fixed order: format version first, then summary counts,
    then the checksum, so each failure mode maps to one error class. A
    missing summary triggers recovery: a trailing partial line is dropped
    and the summary is recomputed from what remains.
    """
    path = Path(path)
    raw_lines = path.read_text(encoding="utf-8").split("\n")
    if raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    if not raw_lines:
        raise RecordError(f"{path}: empty file")

    try:
        header = json.loads(raw_lines[0])
    except json.JSONDecodeError as err:
        raise RecordError(f"{path}: unreadable header: {err}") from err
    if header.get("kind") != "header":
        raise RecordError(f"{path}: first line is not a header")
    version = header.get("version")
    if version != FORMAT_VERSION:
        raise VersionError(f"{path}: format version {version}, "
                           f"expected {FORMAT_VERSION}")

    config = config_from_dict(header["config"])
    summary = None
    attempts = []
    hasher = hashlib.sha256()
    recovered = False
    for index, line in enumerate(raw_lines[1:], start=2):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            if index == len(raw_lines):
                # torn tail from a crash mid-write; drop it and recover
                recovered = True
                break
            raise RecordError(f"{path}: line {index} unreadable: {err}") from err
        kind = record.get("kind")
        if kind == "attempt":
            if summary is not None:
                raise RecordError(f"{path}: attempt after summary (line {index})")
            attempts.append(attempt_from_dict(record, config.screen))
            hasher.update((line + "\n").encode("utf-8"))
        elif kind == "summary":
            summary = record
        else:
            raise RecordError(f"{path}: unknown record kind {kind!r} "
                              f"(line {index})")

    counts = _count_outcomes(attempts)
    digest = hasher.hexdigest()
    if summary is None:
        recovered = True
    else:
        if summary["counts"] != counts:
            raise SummaryMismatchError(
                f"{path}: summary counts {summary['counts']} != "
                f"recomputed {counts}")
        if summary["checksum"] != digest:
            raise ChecksumError(f"{path}: attempt bytes do not match the "
                                f"summary checksum")

    return SessionRecord(
        path=path,
        version=version,
        config=config,
        subject=header.get("subject", {}),
        created_at=header.get("created_at", ""),
        attempts=tuple(attempts),
        counts=counts,
        checksum=digest,
        recovered=recovered,
    )


def _rerun(record: SessionRecord) -> tuple:
    engine = Engine(record.config)
    rerun = []
    for original in record.attempts:
        log = original.input_log
        if original.disconnected:
            run = engine.begin_attempt()
            for steering in log:
                run.step(steering)
                if run.state.phase is not Phase.IN_FLIGHT:
                    break
            if run.state.phase is Phase.IN_FLIGHT:
                run.abort()
            rerun.append(run.finish())
        else:
            rerun.append(engine.run_attempt(lambda st, k: log[k]))
    return tuple(rerun)


def replay(source) -> Session:
    """Re-run a session file through the engine and cross-check it.

    The reconstructed attempts must match the recorded ones exactly;
    any divergence means the file does not describe a run this engine
    could have produced.
    """
    record = source if isinstance(source, SessionRecord) else read_session(source)
    rerun = _rerun(record)
    for original, fresh in zip(record.attempts, rerun):
        if original != fresh:
            raise ReplayMismatchError(
                f"{record.path}: attempt {original.seq} diverged on replay")
    return Session(
        id=record.path.stem,
        config=record.config,
        attempts=rerun,
        subject=record.subject,
        created_at=record.created_at,
    )
