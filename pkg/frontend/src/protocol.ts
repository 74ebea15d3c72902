// Wire schema for the realtime steering channel. One JSON object per
// frame; the server sorts keys and uses compact separators, and encode()
// does the same so identical payloads always serialize to identical bytes.

export type Direction = "left" | "right" | "none";

export interface GeometryConfig {
  t: number;
  w: number;
  lambda: number;
  d: number;
  D: number;
  s: number;
  n_channels: number;
  slit_centers: number[];
}

export interface WorldConfig {
  geometry: GeometryConfig;
  screen: string;
  mushroom_count: number;
  mushroom_radius: number;
  lateral_speed: number;
  vertical_speed: number;
  rng_seed: number;
  warmup: boolean;
  trajectory_stride: number;
}

export interface WelcomeFrame {
  type: "welcome";
  version: number;
  config: WorldConfig;
  attempts: number;
}

export interface TickFrame {
  type: "tick";
  seq: number;
  tick: number;
  x: number;
  y: number;
  phase: "in_flight" | "registered" | "blocked" | "missed";
  channel: number | null;
  revealed: [number, number][];
  warmup: boolean;
  remaining: number;
}

export interface AttemptEndFrame {
  type: "attempt-end";
  seq: number;
  outcome: "registered" | "blocked" | "missed";
  channel: number | null;
  touched: boolean;
  excluded: boolean;
  remaining: number;
}

export interface HistogramFrame {
  type: "histogram";
  bins: number[];
  registered: number;
}

export interface SessionEndFrame {
  type: "session-end";
  total: number;
  path: string | null;
}

export interface ErrorFrame {
  type: "error";
  reason: string;
}

export type ServerFrame =
  | WelcomeFrame
  | TickFrame
  | AttemptEndFrame
  | HistogramFrame
  | SessionEndFrame
  | ErrorFrame;

export interface SteerFrame {
  type: "steer";
  direction: Direction;
}

export interface ControlFrame {
  type: "start" | "start-attempt" | "toggle-warmup" | "end";
}

export type ClientFrame = SteerFrame | ControlFrame;

const SERVER_TYPES = new Set([
  "welcome",
  "tick",
  "attempt-end",
  "histogram",
  "session-end",
  "error",
]);

// JSON.stringify keeps insertion order, so walk the value and emit keys
// sorted to match the server's canonical form.
const canonical = (value: unknown): string => {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonical).join(",") + "]";
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .filter(([, v]) => v !== undefined)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  return (
    "{" +
    entries.map(([k, v]) => JSON.stringify(k) + ":" + canonical(v)).join(",") +
    "}"
  );
};

export const encode = (frame: ClientFrame): string => canonical(frame);

export const decode = (text: string): ServerFrame => {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (err) {
    throw new Error(`unparseable frame: ${err}`);
  }
  if (
    typeof parsed !== "object" ||
    parsed === null ||
    typeof (parsed as { type?: unknown }).type !== "string"
  ) {
    throw new Error("frame is not an object with a type field");
  }
  const type = (parsed as { type: string }).type;
  if (!SERVER_TYPES.has(type)) {
    throw new Error(`unknown server frame type ${JSON.stringify(type)}`);
  }
  return parsed as ServerFrame;
};

export const steer = (direction: Direction): SteerFrame => ({
  type: "steer",
  direction,
});

export const control = (type: ControlFrame["type"]): ControlFrame => ({ type });
