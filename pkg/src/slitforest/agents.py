"""Synthetic subjects that steer the engine, used as pipeline oracles.

The model-sampler draws a target channel from a predicted distribution and
steers a two-leg path: drift to the chosen slit center before the screen,
then drift to the target coordinate before the registration plane. Its own
RNG stream is separate from the engine's, so mushroom randomness never
perturbs channel sampling.
"""
from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timezone

from .analytics import Session
from .engine import Attempt, Engine, Phase, Steering, WorldConfig
from .physics import ModelParams, predicted_channel_distribution, x_for_channel


class PlanningError(RuntimeError):
    """A target channel cannot be reached under the configured speeds."""


def sample_channel(dist, rng: random.Random) -> int:
    """Inverse-CDF draw of a 1-based channel from a probability vector."""
    cum = list(itertools.accumulate(float(v) for v in dist))
    if abs(cum[-1] - 1.0) > 1e-9:
        raise ValueError("distribution does not sum to 1")
    return _draw_from_cdf(cum, rng)


def _draw_from_cdf(cum, rng: random.Random) -> int:
    return bisect.bisect_left(cum, rng.random() * cum[-1]) + 1


def _needed_ticks(distance: float, speed: float) -> int:
    # the controller tolerates half a step of settle error
    return math.ceil(max(0.0, distance - speed / 2.0) / speed)


def choose_slit(target_x: float, config: WorldConfig) -> float:
    """Slit center minimizing the lateral speed the flight would need.

    Ties break toward the left slit so planning stays deterministic.
    """
    g = config.geometry
    pre_ticks = g.s / config.vertical_speed
    post_ticks = g.D / config.vertical_speed
    best = None
    for center in sorted(config.screen.slit_centers(g.d)):
        needed = max(abs(center) / pre_ticks, abs(target_x - center) / post_ticks)
        if best is None or needed < best[0]:
            best = (needed, center)
    return best[1]


def make_controller(target: int, config: WorldConfig):
    """Closed-loop steering toward the slit, then toward the target channel."""
    g = config.geometry
    ls = config.lateral_speed
    target_x = x_for_channel(target, g.n_channels)
    slit_x = choose_slit(target_x, config)
    pre_ticks = int(g.s / config.vertical_speed)
    post_ticks = int(g.D / config.vertical_speed)
    if _needed_ticks(abs(slit_x), ls) > pre_ticks or \
            _needed_ticks(abs(target_x - slit_x), ls) > post_ticks:
        raise PlanningError(
            f"channel {target} unreachable at lateral_speed {ls}"
        )

    def control(state, tick_index) -> Steering:
        waypoint = slit_x if state.y < 0 else target_x
        dx = waypoint - state.x
        if dx >= ls / 2.0:
            return Steering.RIGHT
        if dx <= -ls / 2.0:
            return Steering.LEFT
        return Steering.NONE

    return control


def plan_and_fly(target: int, engine: Engine) -> Attempt:
    return engine.run_attempt(make_controller(target, engine.config))


def reachable_channels(config: WorldConfig) -> tuple[int, ...]:
    """Channels a planned flight can settle on under the configured speeds.

    Two-slit worlds cover all 63 channels at the default speeds; a single
    open slit loses the far tail on the opposite side because the whole
    post-screen traverse has to fit into D ticks.
    """
    channels = []
    for channel in range(1, config.geometry.n_channels + 1):
        try:
            make_controller(channel, config)
        except PlanningError:
            continue
        channels.append(channel)
    return tuple(channels)


@dataclass(frozen=True)
class AgentSpec:
    """What to run: agent kind, attempt count, and the agent's RNG seed."""

    kind: str  # model-sampler | uniform | ballistic | replay
    attempts: int
    rng_seed: int = 0
    params: ModelParams | None = None
    input_logs: tuple[tuple[Steering, ...], ...] = dc_field(default=())

    def __post_init__(self):
        if self.kind not in ("model-sampler", "uniform", "ballistic", "replay"):
            raise ValueError(f"unknown agent kind {self.kind!r}")
        if self.attempts < 1:
            raise ValueError("attempts must be positive")
        if self.kind == "model-sampler" and self.params is None:
            raise ValueError("model-sampler needs ModelParams")
        if self.kind == "replay" and len(self.input_logs) < self.attempts:
            raise ValueError("replay needs one input log per attempt")


def run_agent(spec: AgentSpec, world: WorldConfig, subject: dict | None = None) -> Session:
    """Run spec.attempts flights and package them as a Session.

    Sampling agents aim only at channels a plan can reach, the way a live
    subject can only aim within steering range. When nothing is reachable
    the restriction is dropped so the first attempt reports why it failed.
    """
    engine = Engine(world)
    agent_rng = random.Random(spec.rng_seed)
    reachable = ()
    cdf = None
    weights = None
    if spec.kind in ("model-sampler", "uniform"):
        reachable = reachable_channels(world) or \
            tuple(range(1, world.geometry.n_channels + 1))
    if spec.kind == "model-sampler":
        dist = predicted_channel_distribution(spec.params, world.screen)
        reach = set(reachable)
        weights = [float(v) if i + 1 in reach else 0.0
                   for i, v in enumerate(dist)]
        if sum(weights) <= 0.0:
            weights = [float(v) for v in dist]
        cdf = list(itertools.accumulate(weights))

    attempts = []
    for i in range(spec.attempts):
        try:
            if spec.kind == "ballistic":
                att = engine.run_attempt()
            elif spec.kind == "replay":
                log = spec.input_logs[i]
                att = engine.run_attempt(lambda st, k: log[k])
            else:
                if spec.kind == "uniform":
                    target = agent_rng.choice(reachable)
                else:
                    target = _draw_from_cdf(cdf, agent_rng)
                    while weights[target - 1] == 0.0:
                        # random() hit a collapsed bin edge exactly
                        target = _draw_from_cdf(cdf, agent_rng)
                att = plan_and_fly(target, engine)
        except PlanningError as err:
            raise PlanningError(f"attempt {i + 1}: {err}") from err
        attempts.append(att)

    return Session(
        id=f"{spec.kind}-seed{spec.rng_seed}",
        config=world,
        attempts=tuple(attempts),
        subject=dict(subject or {}),
        created_at=datetime.now(timezone.utc).isoformat(),
    )
