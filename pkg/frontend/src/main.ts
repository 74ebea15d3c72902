// Browser entry point: connects to a running session server, paints the
// world on a canvas, and turns held arrow keys into steering replies.

import { SessionRunner } from "./client.js";
import { bindKeyboard, InputScheduler } from "./input.js";
import { computeDrawList, paint } from "./render.js";
import { withHeld } from "./state.js";
import { connectWebSocket } from "./ws.js";

const byId = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing #${id}`);
  }
  return el as T;
};

const canvas = byId<HTMLCanvasElement>("world");
const status = byId<HTMLElement>("status");
const address = byId<HTMLInputElement>("address");
const connectBtn = byId<HTMLButtonElement>("connect");
const startBtn = byId<HTMLButtonElement>("start");
const warmupBtn = byId<HTMLButtonElement>("warmup");
const endBtn = byId<HTMLButtonElement>("end");

const scheduler = new InputScheduler();
bindKeyboard(scheduler, window);

let runner: SessionRunner | null = null;

const setButtons = (connected: boolean): void => {
  connectBtn.disabled = connected;
  startBtn.disabled = !connected;
  warmupBtn.disabled = !connected;
  endBtn.disabled = !connected;
};
setButtons(false);

const repaint = (): void => {
  const ctx = canvas.getContext("2d");
  if (!ctx || !runner) {
    return;
  }
  const state = withHeld(runner.state, scheduler.current());
  paint(ctx, computeDrawList(state, canvas.width, canvas.height));
  status.textContent =
    state.mode === "done" && state.sessionPath
      ? `saved to ${state.sessionPath}`
      : state.banner ?? state.mode;
};

const frameLoop = (): void => {
  repaint();
  requestAnimationFrame(frameLoop);
};
requestAnimationFrame(frameLoop);

connectBtn.addEventListener("click", async () => {
  try {
    const transport = await connectWebSocket(address.value);
    runner = new SessionRunner(transport, {
      steering: () => scheduler.current(),
    });
    setButtons(true);
    void runner.done.then(() => setButtons(false));
  } catch (err) {
    status.textContent = String(err);
  }
});

startBtn.addEventListener("click", () => runner?.sendControl("start"));
warmupBtn.addEventListener("click", () =>
  runner?.sendControl("toggle-warmup"),
);
endBtn.addEventListener("click", () => runner?.sendControl("end"));
