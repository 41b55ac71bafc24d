/** World-to-canvas mapping for the scene view.

The world is in map metres with y pointing up; the canvas has y pointing
down, so the transform flips the vertical axis.  Pan and zoom mutate the
viewport in place and the renderer reads it every frame.
*/

import type { Vec2 } from "./types.js";

export const MIN_SCALE = 5;
export const MAX_SCALE = 400;

/** Candidate lengths for the on-screen scale bar, in metres. */
const BAR_STEPS = [0.1, 0.2, 0.5, 1, 2, 5, 10];

export class Viewport {
  /** Pixels per metre. */
  scale: number;
  /** World coordinate rendered at the canvas centre. */
  center: Vec2;
  width: number;
  height: number;

  constructor(width: number, height: number, scale = 60, center: Vec2 = [0, 0]) {
    this.width = width;
    this.height = height;
    this.scale = clampScale(scale);
    this.center = [center[0], center[1]];
  }

  resize(width: number, height: number): void {
    this.width = width;
    this.height = height;
  }

  worldToScreen(p: Vec2): Vec2 {
    const sx = this.width / 2 + (p[0] - this.center[0]) * this.scale;
    const sy = this.height / 2 - (p[1] - this.center[1]) * this.scale;
    return [sx, sy];
  }

  screenToWorld(p: Vec2): Vec2 {
    const wx = this.center[0] + (p[0] - this.width / 2) / this.scale;
    const wy = this.center[1] - (p[1] - this.height / 2) / this.scale;
    return [wx, wy];
  }

  /** Shift the view by a screen-space delta (e.g. a drag). */
  panBy(dxPx: number, dyPx: number): void {
    this.center = [
      this.center[0] - dxPx / this.scale,
      this.center[1] + dyPx / this.scale,
    ];
  }

  /** Zoom by `factor` about a screen point, keeping that point fixed. */
  zoomAt(screen: Vec2, factor: number): void {
    const anchor = this.screenToWorld(screen);
    this.scale = clampScale(this.scale * factor);
    // Re-anchor: after the scale change the anchor must map back to `screen`.
    const nx = anchor[0] - (screen[0] - this.width / 2) / this.scale;
    const ny = anchor[1] + (screen[1] - this.height / 2) / this.scale;
    this.center = [nx, ny];
  }

  /** Fit a grid (origin + extent in metres) into the canvas with a margin. */
  fitGrid(origin: Vec2, nx: number, ny: number, resolution: number, margin = 0.92): void {
    const spanX = Math.max(nx * resolution, 1e-6);
    const spanY = Math.max(ny * resolution, 1e-6);
    const fit = Math.min(this.width / spanX, this.height / spanY) * margin;
    this.scale = clampScale(fit);
    this.center = [origin[0] + spanX / 2, origin[1] + spanY / 2];
  }
}

export function clampScale(scale: number): number {
  return Math.min(MAX_SCALE, Math.max(MIN_SCALE, scale));
}

export interface ScaleReadout {
  metres: number;
  pixels: number;
  label: string;
}

/** Pick a round scale-bar length that renders between ~40 and ~200 px. */
export function scaleReadout(scale: number): ScaleReadout {
  let best = BAR_STEPS[0];
  for (const step of BAR_STEPS) {
    const px = step * scale;
    if (px <= 200) best = step;
    if (px >= 40 && px <= 200) {
      best = step;
      break;
    }
  }
  const label = best < 1 ? `${(best * 100).toFixed(0)} cm` : `${best} m`;
  return { metres: best, pixels: best * scale, label };
}
