/** Marching-squares iso-lines for the cost field overlay.

Produces world-space line segments at a handful of thresholds; the
renderer draws them over the heatmap so the shape of the field stays
legible even where the colour ramp saturates.
*/

import type { Raster } from "./heatmap.js";
import type { Vec2 } from "./types.js";

export type Segment = [Vec2, Vec2];

/** Linear interpolation of the crossing point along one cell edge. */
function cross(a: number, b: number, iso: number): number {
  const d = b - a;
  if (Math.abs(d) < 1e-12) return 0.5;
  return (iso - a) / d;
}

/** Extract iso-line segments for one threshold from a world-order raster. */
export function contourSegments(raster: Raster, iso: number): Segment[] {
  const { nx, ny, values, resolution, origin } = raster;
  const segs: Segment[] = [];
  const wx = (ix: number) => origin[0] + (ix + 0.5) * resolution;
  const wy = (iy: number) => origin[1] + (iy + 0.5) * resolution;

  for (let iy = 0; iy < ny - 1; iy++) {
    for (let ix = 0; ix < nx - 1; ix++) {
      const v00 = values[iy * nx + ix];
      const v10 = values[iy * nx + ix + 1];
      const v01 = values[(iy + 1) * nx + ix];
      const v11 = values[(iy + 1) * nx + ix + 1];
      let code = 0;
      if (v00 >= iso) code |= 1;
      if (v10 >= iso) code |= 2;
      if (v11 >= iso) code |= 4;
      if (v01 >= iso) code |= 8;
      if (code === 0 || code === 15) continue;

      const x0 = wx(ix);
      const x1 = wx(ix + 1);
      const y0 = wy(iy);
      const y1 = wy(iy + 1);
      const bottom: Vec2 = [x0 + cross(v00, v10, iso) * resolution, y0];
      const top: Vec2 = [x0 + cross(v01, v11, iso) * resolution, y1];
      const left: Vec2 = [x0, y0 + cross(v00, v01, iso) * resolution];
      const right: Vec2 = [x1, y0 + cross(v10, v11, iso) * resolution];

      switch (code) {
        case 1:
        case 14:
          segs.push([left, bottom]);
          break;
        case 2:
        case 13:
          segs.push([bottom, right]);
          break;
        case 3:
        case 12:
          segs.push([left, right]);
          break;
        case 4:
        case 11:
          segs.push([right, top]);
          break;
        case 5: {
          // Saddle: resolve by the cell-centre average.
          const mid = (v00 + v10 + v01 + v11) / 4;
          if (mid >= iso) {
            segs.push([left, top]);
            segs.push([bottom, right]);
          } else {
            segs.push([left, bottom]);
            segs.push([right, top]);
          }
          break;
        }
        case 6:
        case 9:
          segs.push([bottom, top]);
          break;
        case 7:
        case 8:
          segs.push([left, top]);
          break;
        case 10: {
          const mid = (v00 + v10 + v01 + v11) / 4;
          if (mid >= iso) {
            segs.push([left, bottom]);
            segs.push([right, top]);
          } else {
            segs.push([left, top]);
            segs.push([bottom, right]);
          }
          break;
        }
        default:
          break;
      }
    }
  }
  return segs;
}

/** Default thresholds drawn by the layers panel. */
export const DEFAULT_ISO_LEVELS = [0.3, 0.6, 0.9];
