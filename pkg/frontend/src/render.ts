/** Canvas rendering: dots, detection rectangles, oriented bar glyphs. */

import { Detection, Domain, GaborElement } from "./api.js";
import { nfaColor, nfaRange } from "./color.js";

/** Canvas pixels per domain unit (canvas maps 1:1 scaled to fit). */
export function scaleFor(canvas: HTMLCanvasElement, domain: Domain): number {
  return Math.min(canvas.width / domain.width, canvas.height / domain.height);
}

export function canvasToDomain(
  canvas: HTMLCanvasElement,
  domain: Domain,
  ev: MouseEvent,
): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const s = scaleFor(canvas, domain) * (rect.width / canvas.width);
  return [(ev.clientX - rect.left) / s, (ev.clientY - rect.top) / s];
}

function rectCorners(det: Detection): [number, number][] {
  const { ax, ay, bx, by, width } = det.rect;
  const len = Math.hypot(bx - ax, by - ay) || 1e-9;
  const vx = (-(by - ay) / len) * (width / 2);
  const vy = ((bx - ax) / len) * (width / 2);
  return [
    [ax + vx, ay + vy],
    [bx + vx, by + vy],
    [bx - vx, by - vy],
    [ax - vx, ay - vy],
  ];
}

export function drawDotScene(
  ctx: CanvasRenderingContext2D,
  domain: Domain,
  points: [number, number][],
  overlay: Detection[],
  stale: boolean,
): void {
  const s = scaleFor(ctx.canvas, domain);
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.save();
  ctx.scale(s, s);
  ctx.fillStyle = "#111";
  for (const [x, y] of points) {
    ctx.beginPath();
    ctx.arc(x, y, 2.5 / s, 0, 2 * Math.PI);
    ctx.fill();
  }
  const [lo, hi] = nfaRange(overlay.map((d) => d.log10_nfa));
  ctx.lineWidth = 1.5 / s;
  ctx.globalAlpha = stale ? 0.25 : 1.0;
  for (const det of overlay) {
    ctx.strokeStyle = nfaColor(det.log10_nfa, lo, hi);
    const corners = rectCorners(det);
    ctx.beginPath();
    ctx.moveTo(corners[0][0], corners[0][1]);
    for (const [x, y] of corners.slice(1)) ctx.lineTo(x, y);
    ctx.closePath();
    ctx.stroke();
  }
  ctx.restore();
}

export function drawGaborField(
  ctx: CanvasRenderingContext2D,
  domain: Domain,
  elements: GaborElement[],
  barLength: number,
): void {
  const s = scaleFor(ctx.canvas, domain);
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.save();
  ctx.scale(s, s);
  ctx.strokeStyle = "#111";
  ctx.lineWidth = 1.8 / s;
  ctx.lineCap = "round";
  for (const el of elements) {
    const dx = (Math.cos(el.theta) * barLength) / 2;
    const dy = (Math.sin(el.theta) * barLength) / 2;
    ctx.beginPath();
    ctx.moveTo(el.x - dx, el.y - dy);
    ctx.lineTo(el.x + dx, el.y + dy);
    ctx.stroke();
  }
  ctx.restore();
}

export function drawTruthSegment(
  ctx: CanvasRenderingContext2D,
  domain: Domain,
  truth: { x1: number; y1: number; x2: number; y2: number },
): void {
  const s = scaleFor(ctx.canvas, domain);
  ctx.save();
  ctx.scale(s, s);
  ctx.strokeStyle = "rgba(220, 40, 40, 0.8)";
  ctx.lineWidth = 2.5 / s;
  ctx.beginPath();
  ctx.moveTo(truth.x1, truth.y1);
  ctx.lineTo(truth.x2, truth.y2);
  ctx.stroke();
  ctx.restore();
}
