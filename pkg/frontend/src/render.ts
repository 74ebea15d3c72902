// Forest rendering, split in two: computeDrawList turns a ViewState into
// plain shape records (testable without a canvas), paint blits them.
// Logical units: x in channel coordinates (channel c sits at c - 32),
// y from the source at -s up to the registration plane at D.

import type { ViewState } from "./state.js";

export interface Shape {
  kind: "rect" | "circle" | "line" | "text" | "bar";
  tag: string;
  x: number;
  y: number;
  w?: number;
  h?: number;
  r?: number;
  x2?: number;
  y2?: number;
  text?: string;
  color: string;
  value?: number;
}

const PHASE_COLORS: Record<string, string> = {
  in_flight: "#e8f0e8",
  registered: "#7fd47f",
  blocked: "#d47f7f",
  missed: "#b0a060",
};

export const computeDrawList = (
  state: ViewState,
  width: number,
  height: number,
): Shape[] => {
  const shapes: Shape[] = [];
  shapes.push({
    kind: "rect",
    tag: "background",
    x: 0,
    y: 0,
    w: width,
    h: height,
    color: "#102610",
  });
  const cfg = state.config;
  if (!cfg) {
    shapes.push({
      kind: "text",
      tag: "hud",
      x: width / 2,
      y: height / 2,
      text: "connecting...",
      color: "#e8f0e8",
    });
    return shapes;
  }

  if (state.mode === "done" && state.histogram) {
    return shapes.concat(histogramShapes(state, width, height));
  }

  const g = cfg.geometry;
  const halfSpan = (g.n_channels + 1) / 2;
  const toX = (x: number) => ((x + halfSpan) / (2 * halfSpan)) * width;
  const toY = (y: number) => height * (1 - (y + g.s) / (g.s + g.D));

  // the screen: solid wall except the slit apertures
  const screenY = toY(0);
  const cuts = cfg.geometry.slit_centers
    .map((c) => [c - g.w / 2, c + g.w / 2])
    .sort((a, b) => a[0] - b[0]);
  let wallFrom = -halfSpan;
  for (const [lo, hi] of cuts) {
    shapes.push(wallSegment(toX(wallFrom), toX(lo), screenY));
    shapes.push({
      kind: "line",
      tag: "slit",
      x: toX(lo),
      y: screenY,
      x2: toX(hi),
      y2: screenY,
      color: "#1a3a1a",
    });
    wallFrom = hi;
  }
  shapes.push(wallSegment(toX(wallFrom), toX(halfSpan), screenY));

  // registration plane: one tick per channel, slit-aligned ones brighter
  const slitChannels = new Set(
    cfg.geometry.slit_centers.map((c) => Math.round(c) + 32),
  );
  const regY = toY(g.D);
  for (let c = 1; c <= g.n_channels; c++) {
    const px = toX(c - 32);
    shapes.push({
      kind: "line",
      tag: "channel-mark",
      x: px,
      y: regY - 4,
      x2: px,
      y2: regY + 4,
      color: slitChannels.has(c) ? "#f0d060" : "#4a6a4a",
      value: c,
    });
  }

  for (const [mx, my] of state.tick?.revealed ?? []) {
    shapes.push({
      kind: "circle",
      tag: "mushroom",
      x: toX(mx),
      y: toY(my),
      r: Math.max(2, (cfg.mushroom_radius / (2 * halfSpan)) * width),
      color: "#d46a9a",
    });
  }

  if (state.tick) {
    shapes.push({
      kind: "circle",
      tag: "object",
      x: toX(state.tick.x),
      y: toY(state.tick.y),
      r: 5,
      color: PHASE_COLORS[state.tick.phase] ?? "#ffffff",
    });
  }

  const hudParts: string[] = [];
  if (state.tick) {
    hudParts.push(`attempt ${state.tick.seq}`);
    hudParts.push(`${state.tick.remaining} to go`);
  }
  if (state.mode === "warmup") {
    hudParts.push("warm-up (mushrooms visible, not recorded)");
  }
  if (state.lastOutcome) {
    const o = state.lastOutcome;
    hudParts.push(
      `last: ${o.outcome}${o.channel !== null ? ` @ ${o.channel}` : ""}` +
        (o.excluded ? " (excluded)" : ""),
    );
  }
  if (hudParts.length) {
    shapes.push({
      kind: "text",
      tag: "hud",
      x: 8,
      y: 16,
      text: hudParts.join("  |  "),
      color: "#e8f0e8",
    });
  }
  if (state.banner) {
    shapes.push({
      kind: "text",
      tag: "banner",
      x: width / 2,
      y: 40,
      text: state.banner,
      color: "#f0b060",
    });
  }
  return shapes;
};

const wallSegment = (fromX: number, toX: number, y: number): Shape => ({
  kind: "line",
  tag: "screen",
  x: fromX,
  y,
  x2: toX,
  y2: y,
  color: "#7a8a6a",
});

const histogramShapes = (
  state: ViewState,
  width: number,
  height: number,
): Shape[] => {
  const { bins, registered } = state.histogram!;
  const shapes: Shape[] = [];
  const peak = Math.max(...bins, 1);
  const barW = width / bins.length;
  bins.forEach((count, i) => {
    const h = (count / peak) * (height * 0.8);
    shapes.push({
      kind: "bar",
      tag: "hist-bar",
      x: i * barW,
      y: height - h,
      w: barW * 0.9,
      h,
      color: "#7fd47f",
      value: count,
    });
  });
  shapes.push({
    kind: "text",
    tag: "hud",
    x: 8,
    y: 16,
    text:
      `session over: ${state.totalPlayed} attempts, ` +
      `${registered} registered` +
      (state.sessionPath ? `, saved to ${state.sessionPath}` : ""),
    color: "#e8f0e8",
  });
  return shapes;
};

export const paint = (
  ctx: CanvasRenderingContext2D,
  shapes: Shape[],
): void => {
  for (const s of shapes) {
    ctx.fillStyle = s.color;
    ctx.strokeStyle = s.color;
    switch (s.kind) {
      case "rect":
      case "bar":
        ctx.fillRect(s.x, s.y, s.w ?? 0, s.h ?? 0);
        break;
      case "circle":
        ctx.beginPath();
        ctx.arc(s.x, s.y, s.r ?? 1, 0, 2 * Math.PI);
        ctx.fill();
        break;
      case "line":
        ctx.beginPath();
        ctx.moveTo(s.x, s.y);
        ctx.lineTo(s.x2 ?? s.x, s.y2 ?? s.y);
        ctx.stroke();
        break;
      case "text":
        ctx.font = "13px monospace";
        ctx.fillText(s.text ?? "", s.x, s.y);
        break;
    }
  }
};
