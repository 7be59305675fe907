import { describe, expect, it } from "vitest";

import { buildIndex, CinemaMetadata } from "../src/cinema.js";
import * as state from "../src/state.js";

function index() {
  const metadata: CinemaMetadata = {
    encoder: "f32le-rgba",
    sliceAxis: "depth",
    fields: ["salinity", "u", "v"],
    axes: { time: [0, 1, 2], depth: [10, 50], lat: [0, 1], lon: [0, 1] },
    timeSteps: [0, 1, 2],
    imageShape: [2, 2],
  };
  const lines = ["time,depth,field,FILE"];
  for (let t = 0; t < 3; t++) {
    for (const [di, d] of [10, 50].entries()) {
      for (const f of metadata.fields) {
        lines.push(`${t},${d},${f},time${t}_depth${di}_${f}.png`);
      }
    }
  }
  return buildIndex(lines.join("\n"), metadata);
}

describe("viewer state", () => {
  it("slider moves clamp to the index ranges and bump the version", () => {
    const idx = index();
    let st = state.initialState(idx);
    const v0 = st.version;
    st = state.setTime(st, idx, 99);
    expect(st.timeIdx).toBe(2);
    st = state.setTime(st, idx, -5);
    expect(st.timeIdx).toBe(0);
    st = state.setSlice(st, idx, 7);
    expect(st.sliceIdx).toBe(1);
    expect(st.version).toBe(v0 + 3);
  });

  it("one fetch per move for plain fields, two for derived speed", () => {
    const idx = index();
    let st = state.initialState(idx);
    expect(state.requiredFiles(st, idx)).toEqual(["time0_depth0_salinity.png"]);
    st = state.setField(st, "speed");
    expect(state.requiredFiles(st, idx)).toEqual([
      "time0_depth0_u.png",
      "time0_depth0_v.png",
    ]);
  });

  it("overlay toggles are independent of slider state", () => {
    const idx = index();
    let st = state.initialState(idx);
    expect(st.overlays.has("tracks")).toBe(true);
    st = state.toggleOverlay(st, "tracks");
    expect(st.overlays.has("tracks")).toBe(false);
    st = state.setTime(st, idx, 1);
    expect(st.overlays.has("tracks")).toBe(false);
    st = state.toggleOverlay(st, "tracks");
    expect(st.overlays.has("tracks")).toBe(true);
  });

  it("probe setting keeps position", () => {
    const idx = index();
    let st = state.initialState(idx);
    st = state.setProbe(st, { lon: 0.5, lat: 1.0 });
    expect(st.probe).toEqual({ lon: 0.5, lat: 1.0 });
  });
});
