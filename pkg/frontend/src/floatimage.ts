/**
 * Float images: every RGBA pixel holds the four little-endian bytes of an
 * IEEE-754 float32 scalar. NaN marks land.
 */
import { decodePng } from "./png.js";

export interface FloatImage {
  width: number;
  height: number;
  values: Float32Array;
}

/** Reinterpret RGBA bytes as little-endian float32 values.
 *
 * The backing store keeps the exact bit patterns (NaN payloads included);
 * only reading an element into a JS number canonicalizes NaN, which does
 * not affect rendering or probes.
 */
export function rgbaToFloat32(rgba: Uint8Array): Float32Array {
  const copy = new Uint8Array(rgba.length);
  copy.set(rgba);
  const probe = new Uint8Array(new Float32Array([1]).buffer);
  if (probe[3] !== 0x3f) {
    // big-endian host: swap each pixel's bytes before reinterpreting
    for (let i = 0; i < copy.length; i += 4) {
      const a = copy[i];
      const b = copy[i + 1];
      copy[i] = copy[i + 3];
      copy[i + 1] = copy[i + 2];
      copy[i + 2] = b;
      copy[i + 3] = a;
    }
  }
  return new Float32Array(copy.buffer);
}

export async function decodeFloatImage(pngBytes: Uint8Array): Promise<FloatImage> {
  const img = await decodePng(pngBytes);
  return { width: img.width, height: img.height, values: rgbaToFloat32(img.rgba) };
}

export function valueAt(img: FloatImage, col: number, row: number): number {
  if (col < 0 || row < 0 || col >= img.width || row >= img.height) return NaN;
  return img.values[row * img.width + col];
}
