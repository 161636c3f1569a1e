import { describe, expect, it } from "vitest";

import { computeLayout } from "../src/geometry.js";
import { StrokeContext, gradientColor, renderProgress } from "../src/gradient.js";
import { Sample } from "../src/types.js";

class RecordingContext implements StrokeContext {
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 0;
  lineCap = "";
  segments: { from: [number, number]; to: [number, number]; color: string }[] = [];
  private cursor: [number, number] = [0, 0];

  beginPath(): void {}
  moveTo(x: number, y: number): void {
    this.cursor = [x, y];
  }
  lineTo(x: number, y: number): void {
    this.segments.push({ from: this.cursor, to: [x, y],
                         color: String(this.strokeStyle) });
    this.cursor = [x, y];
  }
  stroke(): void {}
}

const LAYOUT = computeLayout(
  { cssWidth: 100, cssHeight: 100, imageW: 100, imageH: 100 });

describe("gradient color", () => {
  it("runs yellow to blue", () => {
    expect(gradientColor(0)).toBe("rgb(255,255,0)");
    expect(gradientColor(1)).toBe("rgb(0,0,255)");
    expect(gradientColor(0.5)).toBe("rgb(128,128,128)");
    expect(gradientColor(-3)).toBe("rgb(255,255,0)");
    expect(gradientColor(9)).toBe("rgb(0,0,255)");
  });
});

describe("progress overlay", () => {
  it("draws nothing for no strokes", () => {
    const ctx = new RecordingContext();
    renderProgress(ctx, [], LAYOUT);
    expect(ctx.segments).toEqual([]);
  });

  it("colors a single stroke from early yellow", () => {
    const ctx = new RecordingContext();
    const stroke: Sample[] = [[0, 0, 0], [50, 0, 100], [100, 0, 200]];
    renderProgress(ctx, [stroke], LAYOUT);
    expect(ctx.segments.length).toBe(2);
    expect(ctx.segments[0].color).toBe("rgb(255,255,0)");
  });

  it("gives two strokes distinct gradient positions", () => {
    const ctx = new RecordingContext();
    const early: Sample[] = [[0, 0, 0], [100, 0, 100]];
    const late: Sample[] = [[0, 50, 200], [100, 50, 300]];
    renderProgress(ctx, [early, late], LAYOUT);
    expect(ctx.segments.length).toBe(2);
    const blue = (c: string) => Number(c.match(/rgb\(\d+,\d+,(\d+)\)/)![1]);
    expect(blue(ctx.segments[0].color)).toBeLessThan(blue(ctx.segments[1].color));
  });
});
