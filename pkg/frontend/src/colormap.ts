/**
 * Colormaps for scalar slices. Sequential for tracers like salinity and
 * temperature, diverging for signed fields like velocity components; NaN
 * renders as the land color.
 */

export type ColormapName = "sequential" | "diverging";

export const LAND_RGBA: [number, number, number, number] = [120, 113, 100, 255];

// compact stop lists; linear interpolation between stops
const SEQUENTIAL: [number, number, number][] = [
  [13, 8, 135],
  [84, 2, 163],
  [156, 23, 158],
  [205, 62, 113],
  [237, 121, 83],
  [251, 180, 76],
  [240, 249, 33],
];

const DIVERGING: [number, number, number][] = [
  [5, 48, 97],
  [67, 147, 195],
  [209, 229, 240],
  [247, 247, 247],
  [253, 219, 199],
  [214, 96, 77],
  [103, 0, 31],
];

function stops(name: ColormapName): [number, number, number][] {
  return name === "diverging" ? DIVERGING : SEQUENTIAL;
}

export function colorFor(name: ColormapName, t: number): [number, number, number] {
  const table = stops(name);
  const clamped = Math.min(1, Math.max(0, t));
  const x = clamped * (table.length - 1);
  const i = Math.min(Math.floor(x), table.length - 2);
  const f = x - i;
  const a = table[i];
  const b = table[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

export function defaultColormap(field: string): ColormapName {
  return field === "u" || field === "v" || field === "vorticity" ? "diverging" : "sequential";
}

/** Data range ignoring NaN; returns [0, 1] for an all-land slice. */
export function finiteRange(values: Float32Array): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (Number.isNaN(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  return [lo, hi];
}

export function mapToRgba(
  values: Float32Array,
  lo: number,
  hi: number,
  name: ColormapName,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(values.length * 4);
  const span = hi - lo || 1;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    const o = i * 4;
    if (Number.isNaN(v)) {
      out[o] = LAND_RGBA[0];
      out[o + 1] = LAND_RGBA[1];
      out[o + 2] = LAND_RGBA[2];
      out[o + 3] = LAND_RGBA[3];
      continue;
    }
    const [r, g, b] = colorFor(name, (v - lo) / span);
    out[o] = r;
    out[o + 1] = g;
    out[o + 2] = b;
    out[o + 3] = 255;
  }
  return out;
}
