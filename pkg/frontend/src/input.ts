// Hold-to-steer: key-down holds a direction, key-up releases it. Events
// can arrive at any rate; they queue here and the session loop flushes
// exactly one steering value per outgoing frame.

import type { Direction } from "./protocol.js";

export class InputScheduler {
  private stack: Direction[] = [];

  keyDown(direction: "left" | "right"): void {
    this.keyUp(direction);
    this.stack.push(direction);
  }

  keyUp(direction: "left" | "right"): void {
    this.stack = this.stack.filter((d) => d !== direction);
  }

  releaseAll(): void {
    this.stack = [];
  }

  // Latest key still held wins, so overlapping presses feel like a
  // direction change rather than a dead zone.
  current(): Direction {
    return this.stack.length ? this.stack[this.stack.length - 1] : "none";
  }
}

const KEY_TO_DIRECTION: Record<string, "left" | "right"> = {
  ArrowLeft: "left",
  ArrowRight: "right",
  KeyA: "left",
  KeyD: "right",
};

export const bindKeyboard = (
  scheduler: InputScheduler,
  target: {
    addEventListener(type: string, cb: (e: KeyboardEvent) => void): void;
    removeEventListener(type: string, cb: (e: KeyboardEvent) => void): void;
  },
): (() => void) => {
  const down = (e: KeyboardEvent) => {
    const dir = KEY_TO_DIRECTION[e.code];
    if (dir && !e.repeat) {
      scheduler.keyDown(dir);
      e.preventDefault?.();
    }
  };
  const up = (e: KeyboardEvent) => {
    const dir = KEY_TO_DIRECTION[e.code];
    if (dir) {
      scheduler.keyUp(dir);
      e.preventDefault?.();
    }
  };
  target.addEventListener("keydown", down);
  target.addEventListener("keyup", up);
  return () => {
    target.removeEventListener("keydown", down);
    target.removeEventListener("keyup", up);
  };
};
