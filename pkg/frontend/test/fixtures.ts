// Frame factories mirroring what the server sends, for reducer and
// rendering tests that never open a socket.

import type {
  AttemptEndFrame,
  TickFrame,
  WelcomeFrame,
  WorldConfig,
} from "../src/protocol.js";

export const twoSlitConfig = (warmup = false): WorldConfig => ({
  geometry: {
    t: 0.5,
    w: 2,
    lambda: 4,
    d: 14,
    D: 40,
    s: 100,
    n_channels: 63,
    slit_centers: [-7, 7],
  },
  screen: "two-slit",
  mushroom_count: 20,
  mushroom_radius: 1.25,
  lateral_speed: 0.75,
  vertical_speed: 1,
  rng_seed: 7,
  warmup,
  trajectory_stride: 1,
});

export const welcome = (warmup = false, attempts = 10): WelcomeFrame => ({
  type: "welcome",
  version: 1,
  config: twoSlitConfig(warmup),
  attempts,
});

export const tick = (over: Partial<TickFrame> = {}): TickFrame => ({
  type: "tick",
  seq: 1,
  tick: 0,
  x: 0,
  y: -100,
  phase: "in_flight",
  channel: null,
  revealed: [],
  warmup: false,
  remaining: 10,
  ...over,
});

export const attemptEnd = (
  over: Partial<AttemptEndFrame> = {},
): AttemptEndFrame => ({
  type: "attempt-end",
  seq: 1,
  outcome: "registered",
  channel: 32,
  touched: false,
  excluded: false,
  remaining: 9,
  ...over,
});
