/**
 * Mapping between on-screen canvas coordinates (CSS pixels) and source-image
 * pixel coordinates.
 *
 * The canvas letterboxes the image: it is scaled uniformly to fit and
 * centered. All math stays in floats, so a canvas->image->canvas round trip
 * is exact to well under half a pixel at any window size.
 */

export interface Viewport {
  cssWidth: number;
  cssHeight: number;
  imageW: number;
  imageH: number;
}

export interface Layout {
  scale: number;   // canvas px per image px
  offsetX: number; // canvas x of image x=0
  offsetY: number;
}

export interface Point {
  x: number;
  y: number;
}

export function computeLayout(vp: Viewport): Layout {
  if (vp.cssWidth <= 0 || vp.cssHeight <= 0 || vp.imageW <= 0 || vp.imageH <= 0) {
    throw new Error("viewport dimensions must be positive");
  }
  const scale = Math.min(vp.cssWidth / vp.imageW, vp.cssHeight / vp.imageH);
  return {
    scale,
    offsetX: (vp.cssWidth - vp.imageW * scale) / 2,
    offsetY: (vp.cssHeight - vp.imageH * scale) / 2,
  };
}

export function canvasToImage(p: Point, layout: Layout): Point {
  return {
    x: (p.x - layout.offsetX) / layout.scale,
    y: (p.y - layout.offsetY) / layout.scale,
  };
}

export function imageToCanvas(p: Point, layout: Layout): Point {
  return {
    x: p.x * layout.scale + layout.offsetX,
    y: p.y * layout.scale + layout.offsetY,
  };
}

/** Inside the image rectangle, boundary included. */
export function inImageBounds(p: Point, imageW: number, imageH: number): boolean {
  return p.x >= 0 && p.x <= imageW && p.y >= 0 && p.y <= imageH;
}
