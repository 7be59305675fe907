/**
 * Cinema index access: data.csv rows (time, depth|lon, field, FILE) plus the
 * metadata.json sidecar describing axes, fields, and the encoder.
 */

export interface CinemaMetadata {
  encoder: string;
  sliceAxis: "depth" | "lon";
  fields: string[];
  axes: { time: number[]; depth: number[]; lat: number[]; lon: number[] };
  timeSteps: number[];
  imageShape: [number, number];
}

export interface CinemaIndex {
  metadata: CinemaMetadata;
  times: number[];
  slices: number[];
  fields: string[];
  /** (timeStep, sliceIndex, field) -> relative file path */
  fileFor(t: number, slice: number, field: string): string;
}

export function parseCsv(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

export function buildIndex(csvText: string, metadata: CinemaMetadata): CinemaIndex {
  if (metadata.encoder !== "f32le-rgba") {
    throw new Error(`unsupported encoder ${metadata.encoder}`);
  }
  const rows = parseCsv(csvText);
  const header = rows[0];
  if (!header || header[header.length - 1] !== "FILE") {
    throw new Error(`malformed index header: ${header?.join(",")}`);
  }
  const sliceKey = header[1];
  const sliceCoords = metadata.sliceAxis === "depth" ? metadata.axes.depth : metadata.axes.lon;
  const files = new Map<string, string>();
  const timeSet = new Set<number>();
  for (const rec of rows.slice(1)) {
    if (rec.length !== 4) throw new Error(`malformed index row: ${rec.join(",")}`);
    const t = Number(rec[0]);
    const sliceValue = Number(rec[1]);
    const field = rec[2];
    const slice = nearestIndex(sliceCoords, sliceValue);
    timeSet.add(t);
    files.set(`${t}|${slice}|${field}`, rec[3]);
  }
  const times = [...timeSet].sort((a, b) => a - b);
  const slices = sliceCoords.map((_, i) => i);
  const fields = metadata.fields;
  // completeness: every combination must resolve to a file
  for (const t of times) {
    for (const s of slices) {
      for (const f of fields) {
        if (!files.has(`${t}|${s}|${f}`)) {
          throw new Error(`index is missing (time=${t}, ${sliceKey}[${s}], ${f})`);
        }
      }
    }
  }
  return {
    metadata,
    times,
    slices,
    fields,
    fileFor: (t, slice, field) => {
      const hit = files.get(`${t}|${slice}|${field}`);
      if (!hit) throw new Error(`no image for (time=${t}, slice=${slice}, ${field})`);
      return hit;
    },
  };
}

export function nearestIndex(coords: number[], value: number): number {
  let best = 0;
  let bestDist = Infinity;
  for (let i = 0; i < coords.length; i++) {
    const d = Math.abs(coords[i] - value);
    if (d < bestDist) {
      best = i;
      bestDist = d;
    }
  }
  return best;
}

export async function loadIndex(baseUrl: string, fetcher = fetch): Promise<CinemaIndex> {
  const metaResp = await fetcher(`${baseUrl}/metadata.json`);
  if (!metaResp.ok) throw new Error(`cannot load metadata.json (${metaResp.status})`);
  const metadata = (await metaResp.json()) as CinemaMetadata;
  const csvResp = await fetcher(`${baseUrl}/data.csv`);
  if (!csvResp.ok) throw new Error(`cannot load data.csv (${csvResp.status})`);
  return buildIndex(await csvResp.text(), metadata);
}
