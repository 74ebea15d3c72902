import json
import random

import pytest

from slitforest.agents import AgentSpec, run_agent
from slitforest.analytics import build_histogram
from slitforest.engine import Steering, WorldConfig
from slitforest.physics import ModelParams, Screen
from slitforest.recording import (
    ChecksumError,
    RecordError,
    ReplayMismatchError,
    SessionWriter,
    SummaryMismatchError,
    VersionError,
    read_session,
    replay,
    rle_decode,
    rle_encode,
    write_session,
)


def make_session(seed=3, attempts=25, mushrooms=20):
    cfg = WorldConfig(screen=Screen.TWO_SLIT, mushroom_count=mushrooms, rng_seed=seed)
    spec = AgentSpec(kind="model-sampler", attempts=attempts, rng_seed=seed + 100,
                     params=ModelParams())
    return run_agent(spec, cfg, subject={"name": "agent"})


def test_rle_round_trip():
    rng = random.Random(4)
    for _ in range(50):
        seq = tuple(rng.choice(list(Steering)) for _ in range(rng.randint(0, 40)))
        assert rle_decode(rle_encode(seq)) == seq
    assert rle_encode([Steering.NONE] * 140) == [["none", 140]]


def test_round_trip_preserves_everything(tmp_path):
    session = make_session()
    path = write_session(session, tmp_path / "s.jsonl")
    record = read_session(path)
    assert record.version == 1
    assert record.config == session.config
    assert record.subject == {"name": "agent"}
    assert record.created_at == session.created_at
    assert record.attempts == session.attempts
    assert not record.recovered
    assert record.counts["total"] == 25


def test_counts_cover_all_outcomes(tmp_path):
    session = make_session(seed=9, attempts=40)
    record = read_session(write_session(session, tmp_path / "s.jsonl"))
    c = record.counts
    assert c["registered"] + c["blocked"] + c["missed"] == c["total"] == 40
    assert c["excluded"] == sum(a.excluded for a in session.attempts)


def test_replay_reproduces_histogram(tmp_path):
    session = make_session(seed=5)
    path = write_session(session, tmp_path / "s.jsonl")
    replayed = replay(path)
    assert replayed.attempts == session.attempts
    assert build_histogram(replayed) == build_histogram(session)


def test_tampered_outcome_hits_summary_check(tmp_path):
    path = write_session(make_session(), tmp_path / "s.jsonl")
    lines = path.read_text().splitlines()
    for i, line in enumerate(lines):
        rec = json.loads(line)
        if rec.get("kind") == "attempt" and rec["outcome"] == "registered":
            rec["outcome"] = "blocked"
            rec["channel"] = None
            rec["excluded"] = True
            lines[i] = json.dumps(rec, sort_keys=True, separators=(",", ":"))
            break
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SummaryMismatchError):
        read_session(path)


def test_tampered_channel_hits_checksum(tmp_path):
    path = write_session(make_session(), tmp_path / "s.jsonl")
    lines = path.read_text().splitlines()
    for i, line in enumerate(lines):
        rec = json.loads(line)
        if rec.get("kind") == "attempt" and rec["outcome"] == "registered":
            rec["channel"] = 1 if rec["channel"] != 1 else 2
            lines[i] = json.dumps(rec, sort_keys=True, separators=(",", ":"))
            break
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ChecksumError):
        read_session(path)


def test_version_error_wins_over_everything(tmp_path):
    path = write_session(make_session(), tmp_path / "s.jsonl")
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    header["version"] = 99
    lines[0] = json.dumps(header, sort_keys=True, separators=(",", ":"))
    del lines[1]  # also break the counts; version must still win
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(VersionError):
        read_session(path)


def test_missing_summary_recovers(tmp_path):
    session = make_session(seed=7)
    path = write_session(session, tmp_path / "s.jsonl")
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    record = read_session(path)
    assert record.recovered
    assert record.attempts == session.attempts
    assert record.counts["total"] == len(session.attempts)


def test_torn_tail_is_dropped(tmp_path):
    session = make_session(seed=8)
    path = write_session(session, tmp_path / "s.jsonl")
    lines = path.read_text().splitlines()
    torn = lines[:-1]  # drop summary
    torn[-1] = torn[-1][: len(torn[-1]) // 2]  # cut the last attempt mid-line
    path.write_text("\n".join(torn) + "\n")
    record = read_session(path)
    assert record.recovered
    assert record.attempts == session.attempts[:-1]


def test_garbage_midfile_is_an_error(tmp_path):
    path = write_session(make_session(), tmp_path / "s.jsonl")
    lines = path.read_text().splitlines()
    lines.insert(3, "{not json")
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(RecordError):
        read_session(path)


def test_writer_streams_readable_prefix(tmp_path):
    session = make_session(seed=11, attempts=10)
    path = tmp_path / "s.jsonl"
    writer = SessionWriter(path, session.config, session.subject)
    for attempt in session.attempts[:4]:
        writer.add(attempt)
    # before finalize the file on disk is already a valid recovered record
    record = read_session(path)
    assert record.recovered
    assert len(record.attempts) == 4
    for attempt in session.attempts[4:]:
        writer.add(attempt)
    writer.finalize()
    assert not read_session(path).recovered


def test_replay_detects_wrong_seed(tmp_path):
    session = make_session(seed=13, attempts=15)
    other = WorldConfig(screen=Screen.TWO_SLIT, mushroom_count=20, rng_seed=14)
    path = tmp_path / "s.jsonl"
    writer = SessionWriter(path, other, session.subject)
    for attempt in session.attempts:
        writer.add(attempt)
    writer.finalize()
    with pytest.raises(ReplayMismatchError):
        replay(path)


def test_replay_without_mushrooms_matches_too(tmp_path):
    cfg = WorldConfig(screen=Screen.ONE_SLIT_CENTER, mushroom_count=0, rng_seed=1)
    session = run_agent(AgentSpec(kind="ballistic", attempts=20), cfg)
    path = write_session(session, tmp_path / "b.jsonl")
    h = build_histogram(replay(path))
    assert h.value(32) == 20


def test_record_to_session_skips_rerun(tmp_path):
    session = make_session(seed=21)
    record = read_session(write_session(session, tmp_path / "s.jsonl"))
    rebuilt = record.to_session()
    assert rebuilt.attempts == session.attempts
    assert rebuilt.config == session.config
