/**
 * Stroke capture: raw pointer events in, image-space samples out.
 *
 * Samples are recorded at the native pointer rate (no throttling) and mapped
 * to source-image pixels immediately. A pointer that leaves the image area
 * mid-stroke ends the stroke at the last in-bounds sample; if it comes back
 * while still pressed, a fresh stroke starts. Timestamps are integer
 * milliseconds since image reveal, clamped non-decreasing within a stroke.
 */

import { Layout, Point, canvasToImage, inImageBounds } from "./geometry.js";
import { Sample } from "./types.js";

export class StrokeRecorder {
  private strokes: Sample[][] = [];
  private current: Sample[] | null = null;
  private down = false;

  constructor(
    private layout: Layout,
    private imageW: number,
    private imageH: number,
  ) {}

  /** Swap in a new layout after a window resize; image space is unchanged. */
  setLayout(layout: Layout): void {
    this.layout = layout;
  }

  pointerDown(p: Point, tMs: number): void {
    this.down = true;
    this.current = null;
    this.addSample(p, tMs);
  }

  pointerMove(p: Point, tMs: number): void {
    if (!this.down) return;
    this.addSample(p, tMs);
  }

  pointerUp(p: Point, tMs: number): void {
    if (this.down) this.addSample(p, tMs);
    this.down = false;
    this.endStroke();
  }

  private addSample(canvasPoint: Point, tMs: number): void {
    const img = canvasToImage(canvasPoint, this.layout);
    if (!inImageBounds(img, this.imageW, this.imageH)) {
      this.endStroke(); // stroke ends at the last in-bounds sample
      return;
    }
    if (!this.current) {
      this.current = [];
      this.strokes.push(this.current);
    }
    const t = Math.max(0, Math.round(tMs));
    const prev = this.current[this.current.length - 1];
    const clamped = prev ? Math.max(t, prev[2]) : t;
    this.current.push([img.x, img.y, clamped]);
  }

  private endStroke(): void {
    this.current = null;
  }

  /** Copy of everything captured so far (empty strokes never appear). */
  snapshot(): Sample[][] {
    return this.strokes.map((s) => s.map((p) => [...p] as Sample));
  }

  strokeCount(): number {
    return this.strokes.length;
  }
}
