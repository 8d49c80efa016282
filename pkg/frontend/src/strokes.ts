/** Stroke geometry: pointer paths in display space become polylines in
 * image space, which is what the server rasterizes. */

import type { StrokeLabel, StrokePayload } from './api.js';

export interface Point {
  x: number;
  y: number;
}

/** Scale that fits an image into the viewport without upsampling. */
export function fitScale(
  imageWidth: number,
  imageHeight: number,
  viewWidth: number,
  viewHeight: number,
): number {
  return Math.min(1, viewWidth / imageWidth, viewHeight / imageHeight);
}

/** Map a pointer position (relative to the canvas box) into image
 * coordinates. At 1:1 zoom this is the identity, so the geometry sent
 * to the server matches the on-screen stroke within a pixel. */
export function displayToImage(offsetX: number, offsetY: number, scale: number): Point {
  return { x: offsetX / scale, y: offsetY / scale };
}

/** Accumulates one stroke while the pointer is down. A click with no
 * movement still yields a one-point stroke (a dot). */
export class StrokeTracker {
  private points: Point[] = [];

  constructor(
    public readonly label: StrokeLabel,
    public readonly radius: number,
  ) {}

  get active(): boolean {
    return this.points.length > 0;
  }

  get lastPoint(): Point | null {
    return this.points.length ? this.points[this.points.length - 1] : null;
  }

  begin(p: Point): void {
    this.points = [p];
  }

  extend(p: Point): Point | null {
    if (!this.points.length) return null;
    const last = this.points[this.points.length - 1];
    if (p.x === last.x && p.y === last.y) return null;
    this.points.push(p);
    return last;
  }

  finish(): StrokePayload | null {
    if (!this.points.length) return null;
    const payload: StrokePayload = {
      label: this.label,
      radius: this.radius,
      points: this.points.map((p) => [p.x, p.y]),
    };
    this.points = [];
    return payload;
  }
}
