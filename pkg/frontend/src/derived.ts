/**
 * Derived fields recomputed client-side from decoded u/v images.
 *
 * Every step rounds to float32 (Math.fround), which reproduces numpy's
 * float32 arithmetic bit-for-bit: with float64 as the working precision,
 * double rounding is exact for multiply, add, and sqrt.
 */
import type { FloatImage } from "./floatimage.js";

export function speedField(u: FloatImage, v: FloatImage): FloatImage {
  if (u.width !== v.width || u.height !== v.height) {
    throw new Error("u and v images have different shapes");
  }
  const out = new Float32Array(u.values.length);
  for (let i = 0; i < out.length; i++) {
    const uu = Math.fround(u.values[i] * u.values[i]);
    const vv = Math.fround(v.values[i] * v.values[i]);
    out[i] = Math.fround(Math.sqrt(Math.fround(uu + vv)));
  }
  return { width: u.width, height: u.height, values: out };
}

export const DERIVED_FIELDS = ["speed"] as const;

export function isDerived(field: string): boolean {
  return (DERIVED_FIELDS as readonly string[]).includes(field);
}
