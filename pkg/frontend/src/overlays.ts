/**
 * Track and eddy overlays plus the probe transform: GeoJSON polylines in
 * (lon, lat) mapped onto image pixel space through the grid axes.
 */

export interface GeoFeature {
  type: "Feature";
  geometry: { type: string; coordinates: number[][] };
  properties: Record<string, unknown>;
}

export interface GeoCollection {
  type: "FeatureCollection";
  features: GeoFeature[];
}

export interface AxisTransform {
  toPixel(lon: number, lat: number): [number, number];
  toCoords(col: number, row: number): { lon: number; lat: number };
}

/** Fractional index of a value on a monotone coordinate axis. */
export function coordToIndex(coords: number[], value: number): number {
  if (coords.length === 1) return 0;
  if (value <= coords[0]) return 0;
  const last = coords.length - 1;
  if (value >= coords[last]) return last;
  let lo = 0;
  let hi = last;
  while (hi - lo > 1) {
    const mid = (lo + hi) >> 1;
    if (coords[mid] <= value) lo = mid;
    else hi = mid;
  }
  return lo + (value - coords[lo]) / (coords[hi] - coords[lo]);
}

/**
 * Pixel (col, row) = (lon index, lat index): image row r holds latitude
 * index r, exactly as the generator wrote it.
 */
export function axisTransform(lat: number[], lon: number[]): AxisTransform {
  return {
    toPixel(lonV, latV) {
      return [coordToIndex(lon, lonV), coordToIndex(lat, latV)];
    },
    toCoords(col, row) {
      const j = Math.min(Math.max(Math.round(col), 0), lon.length - 1);
      const i = Math.min(Math.max(Math.round(row), 0), lat.length - 1);
      return { lon: lon[j], lat: lat[i] };
    },
  };
}

export interface OverlayPolyline {
  pixels: [number, number][];
  properties: Record<string, unknown>;
}

export function projectLines(geojson: GeoCollection, transform: AxisTransform): OverlayPolyline[] {
  const out: OverlayPolyline[] = [];
  for (const feature of geojson.features) {
    if (feature.geometry.type !== "LineString") continue;
    out.push({
      pixels: feature.geometry.coordinates.map(([lonV, latV]) => transform.toPixel(lonV, latV)),
      properties: feature.properties,
    });
  }
  return out;
}

export function parseGeoJson(text: string): GeoCollection {
  const doc = JSON.parse(text) as GeoCollection;
  if (doc.type !== "FeatureCollection" || !Array.isArray(doc.features)) {
    throw new Error("not a GeoJSON FeatureCollection");
  }
  return doc;
}
