"""Deterministic tick-based flight engine.

An object rises from the source plane at y = -s, crosses the slitted screen
at y = 0, and registers on the channel plane at y = D. Steering is velocity
control: a held direction is a constant lateral velocity. All randomness
(mushroom placement and respawn) comes from one random.Random stream, so a
config with its seed plus the per-tick input log reproduces an attempt
bit for bit.
"""
from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .physics import Geometry, Screen

logger = logging.getLogger(__name__)


class Steering(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    NONE = "none"


class Phase(enum.Enum):
    IN_FLIGHT = "in_flight"
    BLOCKED = "blocked"
    REGISTERED = "registered"
    MISSED = "missed"


@dataclass(frozen=True)
class WorldConfig:
    geometry: Geometry = dc_field(default_factory=Geometry)
    screen: Screen = Screen.TWO_SLIT
    mushroom_count: int = 20
    mushroom_radius: float = 0.75
    # 0.75, not smaller: every channel 1..63 must stay reachable through a
    # slit given D ticks of lateral drift after the screen crossing
    lateral_speed: float = 0.75
    vertical_speed: float = 1.0
    rng_seed: int = 0
    warmup: bool = False
    trajectory_stride: int = 0

    def __post_init__(self):
        if self.mushroom_count < 0:
            raise ValueError("mushroom_count must be nonnegative")
        if self.lateral_speed <= 0 or self.vertical_speed <= 0:
            raise ValueError("speeds must be positive")
        if self.mushroom_radius <= 0:
            raise ValueError("mushroom_radius must be positive")
        if self.trajectory_stride < 0:
            raise ValueError("trajectory_stride must be nonnegative")

    def apertures(self) -> tuple[tuple[float, float], ...]:
        half = self.geometry.w / 2.0
        return tuple((c - half, c + half) for c in self.screen.slit_centers(self.geometry.d))


def set_warmup(w: WorldConfig, visible: bool) -> WorldConfig:
    """Toggle the warm-up visibility flag; field re-randomization on the
    warmup-to-live transition is the engine's job, not the config's."""
    return w if w.warmup == visible else replace(w, warmup=visible)


@dataclass(slots=True)
class ObjectState:
    x: float
    y: float
    vx: float
    phase: Phase
    channel: int | None = None


@dataclass(frozen=True)
class Attempt:
    seq: int
    screen: Screen
    outcome: Phase
    channel: int | None
    touched_mushroom: bool
    excluded: bool
    trajectory: tuple[tuple[float, float], ...]
    input_log: tuple[Steering, ...]
    disconnected: bool = False


class MushroomField:
    """Fixed-size set of hidden points between source and screen and between
    screen and registration plane. Touched points join the revealed history
    and are immediately replaced, keeping the count constant."""

    def __init__(self, positions: np.ndarray):
        self.positions = positions
        self._px = positions[:, 0] if len(positions) else positions.reshape(0)
        self._py = positions[:, 1] if len(positions) else positions.reshape(0)
        self.revealed: list[tuple[float, float]] = []

    @property
    def count(self) -> int:
        return len(self.positions)

    @staticmethod
    def _regions(config: WorldConfig) -> list[tuple[float, float, float, float]]:
        g = config.geometry
        m = config.mushroom_radius
        half_w = g.n_channels / 2.0 - m
        regions = []
        if g.s - 2 * m > 0:
            regions.append((-half_w, half_w, -g.s + m, -m))
        if g.D - 2 * m > 0:
            regions.append((-half_w, half_w, m, g.D - m))
        return regions

    @classmethod
    def random(cls, config: WorldConfig, rng: random.Random) -> "MushroomField":
        m = config.mushroom_count
        if m == 0:
            return cls(np.empty((0, 2), dtype=float))
        regions = cls._regions(config)
        if not regions:
            raise ValueError("mushroom_radius leaves no room in the forest regions")
        pts = [cls._draw(regions, rng) for _ in range(m)]
        return cls(np.array(pts, dtype=float))

    @staticmethod
    def _draw(regions, rng: random.Random) -> tuple[float, float]:
        # area-weighted region choice, then uniform inside
        areas = [(x1 - x0) * (y1 - y0) for x0, x1, y0, y1 in regions]
        pick = rng.random() * sum(areas)
        chosen = regions[-1]  # float-sum slack may overshoot the last edge
        for region, area in zip(regions, areas):
            if pick < area:
                chosen = region
                break
            pick -= area
        x0, x1, y0, y1 = chosen
        return (rng.uniform(x0, x1), rng.uniform(y0, y1))

    def sweep(self, x0: float, y0: float, x1: float, y1: float, radius: float) -> list[int]:
        """Indices of mushrooms within radius of the segment travelled this tick."""
        px, py = self._px, self._py
        if len(px) == 0:
            return []
        dx, dy = x1 - x0, y1 - y0
        seg2 = dx * dx + dy * dy
        if seg2 == 0.0:
            t = np.zeros(len(px))
        else:
            t = np.clip(((px - x0) * dx + (py - y0) * dy) / seg2, 0.0, 1.0)
        d2 = (px - (x0 + t * dx)) ** 2 + (py - (y0 + t * dy)) ** 2
        return np.nonzero(d2 < radius * radius)[0].tolist()

    def pick_and_respawn(self, index: int, config: WorldConfig, rng: random.Random,
                         avoid_x: float, avoid_y: float) -> tuple[float, float]:
        """Reveal one mushroom, replace it with a fresh uniform draw that is
        not within mushroom_radius of the object's current position."""
        point = (float(self.positions[index, 0]), float(self.positions[index, 1]))
        self.revealed.append(point)
        regions = self._regions(config)
        r2 = config.mushroom_radius ** 2
        while True:
            nx, ny = self._draw(regions, rng)
            if (nx - avoid_x) ** 2 + (ny - avoid_y) ** 2 >= r2:
                break
        self.positions[index, 0] = nx
        self.positions[index, 1] = ny
        return point


def spawn_attempt(config: WorldConfig, field: MushroomField) -> ObjectState:
    return ObjectState(x=0.0, y=-config.geometry.s, vx=0.0, phase=Phase.IN_FLIGHT)


def apply_steering(state: ObjectState, steering: Steering, config: WorldConfig) -> None:
    if state.phase is not Phase.IN_FLIGHT:
        logger.debug("steering ignored in terminal phase %s", state.phase)
        return
    if steering is Steering.LEFT:
        state.vx = -config.lateral_speed
    elif steering is Steering.RIGHT:
        state.vx = +config.lateral_speed
    else:
        state.vx = 0.0


def tick(config: WorldConfig, field: MushroomField, state: ObjectState,
         rng: random.Random) -> list[tuple[float, float]]:
    """Advance one tick. Returns the mushrooms revealed by this tick's travel.

    The screen and registration planes are evaluated at the interpolated
    crossing point inside the tick; the travelled segment is truncated there
    for the mushroom sweep. Mutates state and field in place.
    """
    if state.phase is not Phase.IN_FLIGHT:
        raise ValueError("tick requires an in-flight state")
    g = config.geometry
    vs = config.vertical_speed
    x0, y0, vx = state.x, state.y, state.vx
    x1, y1 = x0 + vx, y0 + vs

    end_x, end_y = x1, y1
    terminal: Phase | None = None
    channel: int | None = None

    if y0 < 0.0 <= y1:
        f = (0.0 - y0) / vs
        cross_x = x0 + vx * f
        blocked = True
        for lo, hi in config.apertures():
            if lo <= cross_x <= hi:
                blocked = False
                break
        if blocked:
            terminal = Phase.BLOCKED
            end_x, end_y = cross_x, 0.0
    if terminal is None and y0 < g.D <= y1:
        f = (g.D - y0) / vs
        cross_x = x0 + vx * f
        ch = round(cross_x) + (g.n_channels + 1) // 2
        if 1 <= ch <= g.n_channels:
            terminal = Phase.REGISTERED
            channel = ch
        else:
            terminal = Phase.MISSED
        end_x, end_y = cross_x, g.D

    events: list[tuple[float, float]] = []
    if field.count:
        touched = field.sweep(x0, y0, end_x, end_y, config.mushroom_radius)
        for idx in touched:
            events.append(field.pick_and_respawn(idx, config, rng, end_x, end_y))

    state.x, state.y = end_x, end_y
    if terminal is not None:
        state.phase = terminal
        state.channel = channel
    return events


def finalize_attempt(state: ObjectState, *, seq: int, screen: Screen, touched: bool,
                     input_log: tuple[Steering, ...],
                     trajectory: tuple[tuple[float, float], ...] = (),
                     disconnected: bool = False) -> Attempt:
    if state.phase is Phase.IN_FLIGHT:
        raise ValueError("cannot finalize an in-flight attempt")
    return Attempt(
        seq=seq,
        screen=screen,
        outcome=state.phase,
        channel=state.channel,
        touched_mushroom=touched,
        excluded=touched or state.phase is not Phase.REGISTERED,
        trajectory=trajectory,
        input_log=input_log,
        disconnected=disconnected,
    )


class Engine:
    """One live world: config, RNG stream, mushroom field, attempt counter."""

    def __init__(self, config: WorldConfig, rng: random.Random | None = None):
        self.config = config
        self.rng = rng if rng is not None else random.Random(config.rng_seed)
        self.field = MushroomField.random(config, self.rng)
        self.next_seq = 1

    def set_warmup(self, visible: bool) -> None:
        was = self.config.warmup
        self.config = set_warmup(self.config, visible)
        if was and not visible:
            # live start: the practice field is discarded and re-randomized
            self.field = MushroomField.random(self.config, self.rng)

    def begin_attempt(self) -> "AttemptRun":
        run = AttemptRun(self, self.next_seq)
        self.next_seq += 1
        return run

    def run_attempt(self, steering_fn=None, on_tick=None) -> Attempt:
        """Drive one attempt to its terminal phase.

        steering_fn(state, tick_index) -> Steering is polled before every
        tick, mirroring the realtime protocol where one input lands per tick.
        """
        run = self.begin_attempt()
        state = run.state
        while state.phase is Phase.IN_FLIGHT:
            steering = steering_fn(state, run.tick_index) if steering_fn else Steering.NONE
            events = run.step(steering)
            if on_tick is not None:
                on_tick(state, self.field, events, run.tick_index - 1)
        return run.finish()


class AttemptRun:
    """Incremental per-tick driver for a single attempt; the realtime server
    steps it between protocol messages."""

    def __init__(self, engine: Engine, seq: int):
        self.engine = engine
        self.seq = seq
        self.state = spawn_attempt(engine.config, engine.field)
        self.touched = False
        self._disconnected = False
        self.tick_index = 0
        self.inputs: list[Steering] = []
        stride = engine.config.trajectory_stride
        self.trajectory: list[tuple[float, float]] | None = (
            [(self.state.x, self.state.y)] if stride > 0 else None
        )

    def step(self, steering: Steering) -> list[tuple[float, float]]:
        apply_steering(self.state, steering, self.engine.config)
        self.inputs.append(steering)
        events = tick(self.engine.config, self.engine.field, self.state, self.engine.rng)
        self.tick_index += 1
        if events:
            self.touched = True
        if self.trajectory is not None:
            stride = self.engine.config.trajectory_stride
            if self.state.phase is not Phase.IN_FLIGHT or self.tick_index % stride == 0:
                self.trajectory.append((self.state.x, self.state.y))
        return events

    def abort(self) -> None:
        """Mark a flight lost mid-air (transport loss); it counts as Missed."""
        if self.state.phase is Phase.IN_FLIGHT:
            self.state.phase = Phase.MISSED
        self._disconnected = True

    def finish(self) -> Attempt:
        return finalize_attempt(
            self.state,
            seq=self.seq,
            screen=self.engine.config.screen,
            touched=self.touched,
            input_log=tuple(self.inputs),
            trajectory=tuple(self.trajectory) if self.trajectory is not None else (),
            disconnected=self._disconnected,
        )
