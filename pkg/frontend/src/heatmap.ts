/** Cost-field rasterisation helpers.

The server ships field grids row-major with row 0 at the lowest y (the
bottom of the map); canvas images put row 0 at the top, so the painter
flips rows.  Large grids are max-pooled down before painting so a dense
field never stalls the UI thread.
*/

import type { FieldPayload, Vec2 } from "./types.js";

export interface Raster {
  nx: number;
  ny: number;
  resolution: number;
  origin: Vec2;
  /** Row-major, row 0 still at the bottom (world order). */
  values: Float32Array;
}

/** Max-pool the grid by an integer stride until it fits under `maxCells`. */
export function downsample(field: FieldPayload, maxCells = 20000): Raster {
  const { nx, ny } = field;
  let stride = 1;
  while (Math.ceil(nx / stride) * Math.ceil(ny / stride) > maxCells) {
    stride += 1;
  }
  if (stride === 1) {
    return {
      nx,
      ny,
      resolution: field.resolution,
      origin: field.origin,
      values: Float32Array.from(field.values),
    };
  }
  const onx = Math.ceil(nx / stride);
  const ony = Math.ceil(ny / stride);
  const out = new Float32Array(onx * ony);
  for (let oy = 0; oy < ony; oy++) {
    for (let ox = 0; ox < onx; ox++) {
      let peak = -Infinity;
      for (let iy = oy * stride; iy < Math.min((oy + 1) * stride, ny); iy++) {
        for (let ix = ox * stride; ix < Math.min((ox + 1) * stride, nx); ix++) {
          const v = field.values[iy * nx + ix];
          if (v > peak) peak = v;
        }
      }
      out[oy * onx + ox] = peak;
    }
  }
  return {
    nx: onx,
    ny: ony,
    resolution: field.resolution * stride,
    origin: field.origin,
    values: out,
  };
}

/** Number of entries in the colour lookup table. */
const LUT_SIZE = 256;

export interface Rgba {
  r: number;
  g: number;
  b: number;
  a: number;
}

/** Cold-to-hot ramp: transparent blue through orange to opaque red. */
export function colormapEntry(t: number): Rgba {
  const u = Math.min(1, Math.max(0, t));
  const r = Math.round(255 * Math.min(1, 0.2 + 1.4 * u));
  const g = Math.round(255 * Math.max(0, 0.85 - 1.1 * Math.abs(u - 0.4)));
  const b = Math.round(255 * Math.max(0, 0.9 - 1.6 * u));
  const a = Math.round(255 * Math.min(0.82, 0.05 + 0.95 * u));
  return { r, g, b, a };
}

export function buildLut() {
  const lut = new Uint8ClampedArray(LUT_SIZE * 4);
  for (let i = 0; i < LUT_SIZE; i++) {
    const { r, g, b, a } = colormapEntry(i / (LUT_SIZE - 1));
    lut[i * 4] = r;
    lut[i * 4 + 1] = g;
    lut[i * 4 + 2] = b;
    lut[i * 4 + 3] = a;
  }
  return lut;
}

/** Paint a raster into RGBA bytes, flipping rows so north is up. */
export function rasterToRgba(raster: Raster, lut: Uint8ClampedArray, vmax = 1.0) {
  const { nx, ny, values } = raster;
  const out = new Uint8ClampedArray(nx * ny * 4);
  const scale = vmax > 0 ? 1 / vmax : 0;
  for (let iy = 0; iy < ny; iy++) {
    const srcRow = ny - 1 - iy;
    for (let ix = 0; ix < nx; ix++) {
      const v = values[srcRow * nx + ix] * scale;
      const idx = Math.min(LUT_SIZE - 1, Math.max(0, Math.round(v * (LUT_SIZE - 1))));
      const o = (iy * nx + ix) * 4;
      out[o] = lut[idx * 4];
      out[o + 1] = lut[idx * 4 + 1];
      out[o + 2] = lut[idx * 4 + 2];
      out[o + 3] = lut[idx * 4 + 3];
    }
  }
  return out;
}
