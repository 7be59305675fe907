import { describe, expect, it } from "vitest";

import {
  axisTransform,
  coordToIndex,
  parseGeoJson,
  projectLines,
} from "../src/overlays.js";
import { fixtureText } from "./helpers.js";

describe("axis transform", () => {
  it("maps coordinates to fractional indices", () => {
    const coords = [10, 20, 40];
    expect(coordToIndex(coords, 10)).toBe(0);
    expect(coordToIndex(coords, 15)).toBeCloseTo(0.5);
    expect(coordToIndex(coords, 30)).toBeCloseTo(1.5);
    expect(coordToIndex(coords, 40)).toBe(2);
    expect(coordToIndex(coords, 999)).toBe(2); // clamped
  });

  it("round trips pixel to coords at nodes", () => {
    const tr = axisTransform([0, 1, 2], [5, 6, 7, 8]);
    expect(tr.toPixel(6, 1)).toEqual([1, 1]);
    expect(tr.toCoords(3, 2)).toEqual({ lon: 8, lat: 2 });
  });
});

describe("track overlay", () => {
  it("fixture track renders one polyline spanning 4 time positions", async () => {
    const doc = parseGeoJson(await fixtureText("viewer_data", "tracks.geojson"));
    expect(doc.features.length).toBe(1);
    const meta = JSON.parse(await fixtureText("viewer_data", "metadata.json"));
    const tr = axisTransform(meta.axes.lat, meta.axes.lon);
    const [line] = projectLines(doc, tr);
    expect(line.pixels.length).toBe(4);
    expect(line.properties.length).toBe(4);
    // monotone drift to the northeast, inside the image
    for (let i = 1; i < line.pixels.length; i++) {
      expect(line.pixels[i][0]).toBeGreaterThan(line.pixels[i - 1][0]);
      expect(line.pixels[i][1]).toBeGreaterThan(line.pixels[i - 1][1]);
    }
    for (const [x, y] of line.pixels) {
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThan(meta.axes.lon.length);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThan(meta.axes.lat.length);
    }
  });

  it("eddy overlay parses as polylines", async () => {
    const doc = parseGeoJson(await fixtureText("viewer_data", "eddies.geojson"));
    expect(doc.features.length).toBeGreaterThan(0);
  });

  it("rejects non-collections", () => {
    expect(() => parseGeoJson('{"type": "Feature"}')).toThrow(/FeatureCollection/);
  });
});
