import { describe, expect, it } from "vitest";

import { rgbaToFloat32, valueAt } from "../src/floatimage.js";
import { asUint32 } from "./helpers.js";

function bytesOf(patterns: number[]): Uint8Array {
  const u32 = new Uint32Array(patterns);
  return new Uint8Array(u32.buffer.slice(0));
}

describe("rgba to float32", () => {
  it("reinterprets little-endian bytes", () => {
    // 0x40490fdb = 3.14159274f
    const out = rgbaToFloat32(bytesOf([0x40490fdb]));
    expect(out.length).toBe(1);
    expect(out[0]).toBeCloseTo(3.1415927, 6);
  });

  it("preserves NaN payloads, infinities, and denormals bit-for-bit", () => {
    const patterns = [
      0x7fc00000, // canonical NaN
      0x7fc00001, // NaN with payload
      0xffc12345, // negative NaN with payload
      0x7f800000, // +Inf
      0xff800000, // -Inf
      0x00000001, // smallest denormal
      0x80000001, // negative denormal
      0x00000000, // +0
      0x80000000, // -0
    ];
    const out = rgbaToFloat32(bytesOf(patterns));
    expect([...asUint32(out)]).toEqual(patterns.map((p) => p >>> 0));
    expect(Number.isNaN(out[0])).toBe(true);
    expect(Number.isNaN(out[1])).toBe(true);
    expect(out[3]).toBe(Infinity);
    expect(out[4]).toBe(-Infinity);
  });

  it("probes by pixel position", () => {
    const img = { width: 2, height: 2, values: new Float32Array([1, 2, 3, 4]) };
    expect(valueAt(img, 0, 0)).toBe(1);
    expect(valueAt(img, 1, 1)).toBe(4);
    expect(Number.isNaN(valueAt(img, 5, 0))).toBe(true);
  });
});
