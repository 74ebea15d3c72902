// ViewState is a pure fold over server frames. Rendering reads this and
// nothing else; no outcome is ever computed on the client.

import type {
  Direction,
  ServerFrame,
  TickFrame,
  WorldConfig,
} from "./protocol.js";

export type Mode = "connecting" | "lobby" | "warmup" | "live" | "done";

export interface ViewState {
  mode: Mode;
  config: WorldConfig | null;
  attemptsTotal: number;
  tick: TickFrame | null;
  lastOutcome: {
    seq: number;
    outcome: string;
    channel: number | null;
    excluded: boolean;
  } | null;
  histogram: { bins: number[]; registered: number } | null;
  sessionPath: string | null;
  totalPlayed: number;
  banner: string | null;
  held: Direction;
}

export const initialState: ViewState = {
  mode: "connecting",
  config: null,
  attemptsTotal: 0,
  tick: null,
  lastOutcome: null,
  histogram: null,
  sessionPath: null,
  totalPlayed: 0,
  banner: null,
  held: "none",
};

export const reduce = (state: ViewState, frame: ServerFrame): ViewState => {
  switch (frame.type) {
    case "welcome":
      return {
        ...state,
        mode: frame.config.warmup ? "warmup" : "lobby",
        config: frame.config,
        attemptsTotal: frame.attempts,
        banner: null,
      };
    case "tick":
      return {
        ...state,
        mode: frame.warmup ? "warmup" : "live",
        tick: frame,
        banner: null,
      };
    case "attempt-end":
      return {
        ...state,
        lastOutcome: {
          seq: frame.seq,
          outcome: frame.outcome,
          channel: frame.channel,
          excluded: frame.excluded,
        },
      };
    case "histogram":
      return {
        ...state,
        histogram: { bins: frame.bins, registered: frame.registered },
      };
    case "session-end":
      return {
        ...state,
        mode: "done",
        sessionPath: frame.path,
        totalPlayed: frame.total,
      };
    case "error":
      return { ...state, banner: frame.reason };
  }
};

// Transport loss mid-session: the server voids the in-flight attempt and
// finalizes the record file; the subject reconnects and plays on.
export const onDisconnect = (state: ViewState): ViewState =>
  state.mode === "done"
    ? state
    : { ...state, mode: "done", banner: "attempt voided: connection lost" };

export const withHeld = (state: ViewState, held: Direction): ViewState =>
  state.held === held ? state : { ...state, held };
