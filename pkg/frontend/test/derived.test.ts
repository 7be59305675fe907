import { describe, expect, it } from "vitest";

import { speedField } from "../src/derived.js";
import { decodeFloatImage } from "../src/floatimage.js";
import { asUint32, fixtureBytes } from "./helpers.js";

function constImage(width: number, height: number, value: number) {
  return { width, height, values: new Float32Array(width * height).fill(value) };
}

describe("derived speed", () => {
  it("3-4-5 exactly", () => {
    const out = speedField(constImage(4, 3, 3), constImage(4, 3, 4));
    expect([...out.values]).toEqual(new Array(12).fill(5));
  });

  it("zero fields give a zero raster", () => {
    const out = speedField(constImage(2, 2, 0), constImage(2, 2, 0));
    expect([...out.values]).toEqual([0, 0, 0, 0]);
  });

  it("NaN land propagates", () => {
    const u = constImage(1, 1, NaN);
    const v = constImage(1, 1, 1);
    expect(Number.isNaN(speedField(u, v).values[0])).toBe(true);
  });

  it("shape mismatch is an error", () => {
    expect(() => speedField(constImage(2, 2, 1), constImage(3, 2, 1))).toThrow(/shapes/);
  });

  it("matches the primary's exported speed image bit-for-bit", async () => {
    for (const t of [0, 1]) {
      for (const d of [0, 1]) {
        const u = await decodeFloatImage(await fixtureBytes("viewer_data", `time${t}_depth${d}_u.png`));
        const v = await decodeFloatImage(await fixtureBytes("viewer_data", `time${t}_depth${d}_v.png`));
        const exported = await decodeFloatImage(
          await fixtureBytes("viewer_data", `time${t}_depth${d}_speed.png`),
        );
        const recomputed = speedField(u, v);
        expect(asUint32(recomputed.values)).toEqual(asUint32(exported.values));
      }
    }
  });
});
