/**
 * Viewer state: current (time, slice, field) position, colormap, overlay
 * set, and probe. Every mutation bumps the version; async renders carry
 * the version they were started for and only the newest may commit
 * (last-write-wins).
 */
import type { CinemaIndex } from "./cinema.js";
import type { ColormapName } from "./colormap.js";

export interface ViewerState {
  timeIdx: number;
  sliceIdx: number;
  field: string;
  colormap: ColormapName;
  range: [number, number] | null; // null = auto from slice
  overlays: Set<string>;
  probe: { lon: number; lat: number } | null;
  version: number;
}

export function initialState(index: CinemaIndex, derivedFields: string[] = []): ViewerState {
  const field = index.fields[0];
  return {
    timeIdx: 0,
    sliceIdx: 0,
    field,
    colormap: "sequential",
    range: null,
    overlays: new Set(["tracks", "eddies"]),
    probe: null,
    version: 0,
  };
}

function clamp(x: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, Math.round(x)));
}

export function setTime(state: ViewerState, index: CinemaIndex, t: number): ViewerState {
  return { ...state, timeIdx: clamp(t, 0, index.times.length - 1), version: state.version + 1 };
}

export function setSlice(state: ViewerState, index: CinemaIndex, s: number): ViewerState {
  return { ...state, sliceIdx: clamp(s, 0, index.slices.length - 1), version: state.version + 1 };
}

export function setField(state: ViewerState, field: string): ViewerState {
  return { ...state, field, range: null, version: state.version + 1 };
}

export function setColormap(
  state: ViewerState,
  colormap: ColormapName,
  range: [number, number] | null,
): ViewerState {
  return { ...state, colormap, range, version: state.version + 1 };
}

export function toggleOverlay(state: ViewerState, layer: string): ViewerState {
  const overlays = new Set(state.overlays);
  if (overlays.has(layer)) overlays.delete(layer);
  else overlays.add(layer);
  return { ...state, overlays, version: state.version + 1 };
}

export function setProbe(state: ViewerState, probe: { lon: number; lat: number } | null): ViewerState {
  return { ...state, probe, version: state.version + 1 };
}

/** Image files one render of this state needs: one per visible field. */
export function requiredFiles(state: ViewerState, index: CinemaIndex): string[] {
  const t = index.times[state.timeIdx];
  if (state.field === "speed") {
    return [
      index.fileFor(t, state.sliceIdx, "u"),
      index.fileFor(t, state.sliceIdx, "v"),
    ];
  }
  return [index.fileFor(t, state.sliceIdx, state.field)];
}
