// Lockstep session runner. The server opens one reply slot per in-flight
// tick and one per attempt-end with remaining > 0; terminal ticks,
// histogram, session-end, and error frames get no reply. In the lobby the
// server instead waits for free-form control frames. This runner is the
// only place that sends, so the contract holds no matter how fast key
// events arrive.

import {
  control,
  decode,
  encode,
  steer,
  type ClientFrame,
  type ControlFrame,
  type Direction,
  type ServerFrame,
  type TickFrame,
} from "./protocol.js";
import {
  initialState,
  onDisconnect,
  reduce,
  type ViewState,
} from "./state.js";

export interface Transport {
  send(text: string): void;
  close(): void;
  onMessage(cb: (text: string) => void): void;
  onClose(cb: () => void): void;
}

export interface RunnerOptions {
  // polled once per in-flight tick (live and warm-up flights)
  steering?: (tick: TickFrame) => Direction;
  onFrame?: (frame: ServerFrame, state: ViewState) => void;
  // replay mode: verbatim frames sent one per reply opportunity,
  // overriding steering and queued controls entirely
  script?: string[];
}

export class SessionRunner {
  state: ViewState = initialState;
  readonly sent: string[] = [];
  readonly done: Promise<ViewState>;

  private transport: Transport;
  private options: RunnerOptions;
  private script: string[] | null;
  private pendingControl: ControlFrame["type"] | null = null;
  private serverInLobby = false;
  private resolveDone!: (state: ViewState) => void;

  constructor(transport: Transport, options: RunnerOptions = {}) {
    this.transport = transport;
    this.options = options;
    this.script = options.script ? [...options.script] : null;
    this.done = new Promise((resolve) => {
      this.resolveDone = resolve;
    });
    transport.onMessage((text) => this.handle(text));
    transport.onClose(() => {
      this.state = onDisconnect(this.state);
      this.resolveDone(this.state);
    });
  }

  // User controls: sent at once while the server sits in its lobby wait,
  // otherwise queued to occupy the next reply slot.
  sendControl(kind: ControlFrame["type"]): void {
    if (this.serverInLobby) {
      this.send(encode(control(kind)), "lobby", undefined);
    } else {
      this.pendingControl = kind;
    }
  }

  private send(
    text: string,
    slot: "lobby" | "flight" | "ack",
    tick: TickFrame | undefined,
  ): void {
    this.sent.push(text);
    this.transport.send(text);
    const kind = frameType(text);
    if (slot === "lobby") {
      // start and toggle-warmup both leave the lobby; ticks follow.
      // Invalid frames bring an error frame, handled on arrival.
      if (kind === "start" || kind === "toggle-warmup") {
        this.serverInLobby = false;
      }
      return;
    }
    // Abandoning a practice flight puts the server straight back into its
    // lobby wait without any notification, so open the next opportunity
    // here or the exchange deadlocks.
    if (slot === "flight" && tick?.warmup && kind === "toggle-warmup") {
      this.lobbyOpportunity();
    }
  }

  private nextOutgoing(fallback: () => ClientFrame): string | null {
    if (this.script) {
      return this.script.shift() ?? null;
    }
    if (this.pendingControl) {
      const kind = this.pendingControl;
      this.pendingControl = null;
      return encode(control(kind));
    }
    return encode(fallback());
  }

  private reply(slot: "flight" | "ack", tick?: TickFrame): void {
    const text = this.nextOutgoing(() =>
      slot === "flight"
        ? steer(this.options.steering?.(tick!) ?? "none")
        : control("start-attempt"),
    );
    if (text !== null) {
      this.send(text, slot, tick);
    }
  }

  private lobbyOpportunity(): void {
    this.serverInLobby = true;
    const text = this.script
      ? (this.script.shift() ?? null)
      : this.pendingControl
        ? encode(control(this.takePending()!))
        : null;
    if (text !== null) {
      this.send(text, "lobby", undefined);
    }
    // otherwise stay in the lobby until sendControl is called
  }

  private takePending(): ControlFrame["type"] | null {
    const kind = this.pendingControl;
    this.pendingControl = null;
    return kind;
  }

  private handle(text: string): void {
    let frame: ServerFrame;
    try {
      frame = decode(text);
    } catch {
      return; // not ours to answer
    }
    this.state = reduce(this.state, frame);
    this.options.onFrame?.(frame, this.state);

    switch (frame.type) {
      case "welcome":
        if (!frame.config.warmup) {
          this.lobbyOpportunity();
        }
        break;
      case "tick":
        this.serverInLobby = false;
        if (frame.phase === "in_flight") {
          this.reply("flight", frame);
        }
        break;
      case "attempt-end":
        if (frame.remaining > 0) {
          this.reply("ack");
        }
        break;
      case "error":
        // an invalid lobby frame leaves the server waiting again
        if (this.serverInLobby) {
          this.lobbyOpportunity();
        }
        break;
      case "session-end":
        this.resolveDone(this.state);
        break;
      case "histogram":
        break;
    }
  }
}

const frameType = (text: string): string => {
  try {
    return (JSON.parse(text) as { type?: string }).type ?? "";
  } catch {
    return "";
  }
};
