/**
 * Live progress overlay: strokes drawn over the photo with an early-to-late
 * color shift (yellow first, blue last) so drawers see their own order.
 */

import { Layout, imageToCanvas } from "./geometry.js";
import { Sample } from "./types.js";

/** Minimal slice of CanvasRenderingContext2D the overlay needs. */
export interface StrokeContext {
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  lineCap: string;
}

export function gradientColor(fraction: number): string {
  const f = Math.min(1, Math.max(0, fraction));
  const r = Math.round(255 * (1 - f));
  const g = Math.round(255 * (1 - f));
  const b = Math.round(255 * f);
  return `rgb(${r},${g},${b})`;
}

function segmentLength(a: Sample, b: Sample): number {
  return Math.hypot(b[0] - a[0], b[1] - a[1]);
}

/**
 * Draw all strokes, coloring each segment by its share of the total drawn
 * length so far. Single-sample strokes render as dots in their order color.
 */
export function renderProgress(
  ctx: StrokeContext,
  strokes: Sample[][],
  layout: Layout,
  lineWidth = 2,
): void {
  let total = 0;
  for (const stroke of strokes) {
    for (let i = 1; i < stroke.length; i++) {
      total += segmentLength(stroke[i - 1], stroke[i]);
    }
  }
  ctx.lineWidth = lineWidth;
  ctx.lineCap = "round";
  let drawn = 0;
  for (const stroke of strokes) {
    if (stroke.length === 1) {
      const p = imageToCanvas({ x: stroke[0][0], y: stroke[0][1] }, layout);
      ctx.strokeStyle = gradientColor(total > 0 ? drawn / total : 0);
      ctx.beginPath();
      ctx.moveTo(p.x, p.y);
      ctx.lineTo(p.x + 0.01, p.y);
      ctx.stroke();
      continue;
    }
    for (let i = 1; i < stroke.length; i++) {
      const a = imageToCanvas({ x: stroke[i - 1][0], y: stroke[i - 1][1] }, layout);
      const b = imageToCanvas({ x: stroke[i][0], y: stroke[i][1] }, layout);
      ctx.strokeStyle = gradientColor(total > 0 ? drawn / total : 0);
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
      drawn += segmentLength(stroke[i - 1], stroke[i]);
    }
  }
}
