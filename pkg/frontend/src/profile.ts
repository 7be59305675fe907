/**
 * Depth-profile payloads from the primary's profiles.json export, plus the
 * pure chart geometry used to draw value-against-depth polylines.
 */

export interface ProfileDoc {
  position: { lon: number; lat: number };
  depths: number[];
  timeSteps: number[];
  isLand: boolean;
  samples: Record<string, (number | null)[][]>;
}

export function parseProfile(text: string): ProfileDoc {
  const doc = JSON.parse(text) as ProfileDoc;
  if (!Array.isArray(doc.depths) || typeof doc.samples !== "object") {
    throw new Error("malformed profile document");
  }
  return doc;
}

export interface ChartLine {
  points: [number, number][]; // pixel coordinates, depth increasing downward
  label: string;
}

export function chartLines(
  doc: ProfileDoc,
  field: string,
  width: number,
  height: number,
  pad = 24,
): ChartLine[] {
  const series = doc.samples[field];
  if (!series) return [];
  let lo = Infinity;
  let hi = -Infinity;
  for (const column of series) {
    for (const v of column) {
      if (v === null) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo)) return [];
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const dLo = doc.depths[0];
  const dHi = doc.depths[doc.depths.length - 1] || dLo + 1;
  const lines: ChartLine[] = [];
  series.forEach((column, k) => {
    const points: [number, number][] = [];
    column.forEach((v, i) => {
      if (v === null) return;
      const x = pad + ((v - lo) / (hi - lo)) * (width - 2 * pad);
      const y = pad + ((doc.depths[i] - dLo) / (dHi - dLo || 1)) * (height - 2 * pad);
      points.push([x, y]);
    });
    lines.push({ points, label: `t=${doc.timeSteps[k]}` });
  });
  return lines;
}
