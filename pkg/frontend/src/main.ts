/**
 * Viewer wiring: sliders for time/depth/field, canvas rendering with
 * colormaps, derived-speed view, track/eddy overlays, and click-to-profile.
 * Purely read-only over the database directory served as static files.
 */
import { CinemaIndex, loadIndex } from "./cinema.js";
import { decodeFloatImage, FloatImage, valueAt } from "./floatimage.js";
import { defaultColormap, finiteRange, mapToRgba } from "./colormap.js";
import { isDerived, speedField } from "./derived.js";
import { axisTransform, parseGeoJson, projectLines, GeoCollection } from "./overlays.js";
import { chartLines, parseProfile, ProfileDoc } from "./profile.js";
import * as state from "./state.js";

const DATA_BASE = new URLSearchParams(location.search).get("db") ?? "viewer_data";
const SCALE = 4;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function banner(message: string | null) {
  const box = el<HTMLDivElement>("banner");
  box.textContent = message ?? "";
  box.style.display = message ? "block" : "none";
}

class Viewer {
  index!: CinemaIndex;
  st!: state.ViewerState;
  rendered = -1;
  mapOverride: "sequential" | "diverging" | null = null;
  cache = new Map<string, Promise<FloatImage>>();
  tracks: GeoCollection | null = null;
  eddies: GeoCollection | null = null;
  profile: ProfileDoc | null = null;
  current: FloatImage | null = null;

  async start() {
    this.index = await loadIndex(DATA_BASE);
    this.st = state.initialState(this.index);
    await this.loadOverlays();
    this.buildControls();
    await this.render();
  }

  async loadOverlays() {
    this.tracks = await this.tryGeoJson("tracks.geojson", "tracks");
    this.eddies = await this.tryGeoJson("eddies.geojson", "eddies");
    try {
      const resp = await fetch(`${DATA_BASE}/profiles.json`);
      if (resp.ok) this.profile = parseProfile(await resp.text());
    } catch {
      this.profile = null;
    }
  }

  async tryGeoJson(name: string, layer: string): Promise<GeoCollection | null> {
    try {
      const resp = await fetch(`${DATA_BASE}/${name}`);
      if (!resp.ok) throw new Error(String(resp.status));
      return parseGeoJson(await resp.text());
    } catch {
      const note = el<HTMLSpanElement>("overlay-note");
      note.textContent = `${note.textContent ?? ""} ${layer} layer unavailable.`;
      return null;
    }
  }

  fields(): string[] {
    const base = [...this.index.fields];
    if (base.includes("u") && base.includes("v") && !base.includes("speed")) {
      base.push("speed");
    }
    return base;
  }

  buildControls() {
    const timeSlider = el<HTMLInputElement>("time");
    timeSlider.max = String(this.index.times.length - 1);
    timeSlider.value = "0";
    timeSlider.oninput = () => {
      this.st = state.setTime(this.st, this.index, Number(timeSlider.value));
      void this.render();
    };
    const sliceSlider = el<HTMLInputElement>("depth");
    sliceSlider.max = String(this.index.slices.length - 1);
    sliceSlider.value = "0";
    sliceSlider.oninput = () => {
      this.st = state.setSlice(this.st, this.index, Number(sliceSlider.value));
      void this.render();
    };
    const fieldSelect = el<HTMLSelectElement>("field");
    fieldSelect.innerHTML = "";
    for (const f of this.fields()) {
      const opt = document.createElement("option");
      opt.value = f;
      opt.textContent = f;
      fieldSelect.appendChild(opt);
    }
    fieldSelect.onchange = () => {
      this.st = state.setField(this.st, fieldSelect.value);
      void this.render();
    };
    const mapSelect = el<HTMLSelectElement>("colormap");
    const rangeLo = el<HTMLInputElement>("range-lo");
    const rangeHi = el<HTMLInputElement>("range-hi");
    const applyColormap = () => {
      const lo = rangeLo.value === "" ? null : Number(rangeLo.value);
      const hi = rangeHi.value === "" ? null : Number(rangeHi.value);
      const range: [number, number] | null = lo !== null && hi !== null && lo < hi ? [lo, hi] : null;
      const name = mapSelect.value === "auto" ? null : (mapSelect.value as "sequential" | "diverging");
      this.st = state.setColormap(this.st, name ?? defaultColormap(this.st.field), range);
      this.mapOverride = name;
      void this.render();
    };
    mapSelect.onchange = applyColormap;
    rangeLo.onchange = applyColormap;
    rangeHi.onchange = applyColormap;
    for (const layer of ["tracks", "eddies"]) {
      const box = el<HTMLInputElement>(`overlay-${layer}`);
      box.checked = this.st.overlays.has(layer);
      box.onchange = () => {
        this.st = state.toggleOverlay(this.st, layer);
        void this.render();
      };
    }
    const canvas = el<HTMLCanvasElement>("slice");
    canvas.onclick = (ev) => {
      const rect = canvas.getBoundingClientRect();
      const col = Math.floor(((ev.clientX - rect.left) / rect.width) * this.imageWidth());
      const rowFromTop = Math.floor(((ev.clientY - rect.top) / rect.height) * this.imageHeight());
      const row = this.imageHeight() - 1 - rowFromTop; // canvas draws north up
      const transform = this.transform();
      this.st = state.setProbe(this.st, transform.toCoords(col, row));
      this.showProbe(col, row);
      void this.render();
    };
  }

  imageWidth(): number {
    return this.index.metadata.imageShape[1];
  }

  imageHeight(): number {
    return this.index.metadata.imageShape[0];
  }

  transform() {
    return axisTransform(this.index.metadata.axes.lat, this.index.metadata.axes.lon);
  }

  fetchImage(file: string): Promise<FloatImage> {
    let hit = this.cache.get(file);
    if (!hit) {
      hit = fetch(`${DATA_BASE}/${file}`)
        .then(async (resp) => {
          if (!resp.ok) throw new Error(`cannot fetch ${file} (${resp.status})`);
          return decodeFloatImage(new Uint8Array(await resp.arrayBuffer()));
        });
      this.cache.set(file, hit);
      if (this.cache.size > 64) {
        const oldest = this.cache.keys().next().value as string;
        this.cache.delete(oldest);
      }
    }
    return hit;
  }

  async currentImage(): Promise<FloatImage> {
    const t = this.index.times[this.st.timeIdx];
    if (isDerived(this.st.field) && !this.index.fields.includes(this.st.field)) {
      const [u, v] = await Promise.all([
        this.fetchImage(this.index.fileFor(t, this.st.sliceIdx, "u")),
        this.fetchImage(this.index.fileFor(t, this.st.sliceIdx, "v")),
      ]);
      return speedField(u, v);
    }
    return this.fetchImage(this.index.fileFor(t, this.st.sliceIdx, this.st.field));
  }

  async render() {
    const version = this.st.version;
    banner(null);
    let img: FloatImage;
    try {
      img = await this.currentImage();
    } catch (err) {
      banner(String(err));
      return;
    }
    if (version < this.rendered) return; // a newer render already landed
    this.rendered = version;
    this.current = img;

    const [lo, hi] = this.st.range ?? finiteRange(img.values);
    const rgba = mapToRgba(img.values, lo, hi, this.mapOverride ?? defaultColormap(this.st.field));
    const canvas = el<HTMLCanvasElement>("slice");
    canvas.width = img.width * SCALE;
    canvas.height = img.height * SCALE;
    const ctx = canvas.getContext("2d")!;
    const raw = new ImageData(new Uint8ClampedArray(rgba), img.width, img.height);
    const tmp = document.createElement("canvas");
    tmp.width = img.width;
    tmp.height = img.height;
    tmp.getContext("2d")!.putImageData(raw, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.save();
    ctx.scale(SCALE, -SCALE); // north (high lat index) up
    ctx.drawImage(tmp, 0, -img.height);
    ctx.restore();

    this.drawOverlays(ctx, img.height);
    this.updateReadout(lo, hi);
  }

  drawOverlays(ctx: CanvasRenderingContext2D, imgHeight: number) {
    const transform = this.transform();
    const draw = (doc: GeoCollection | null, color: string) => {
      if (!doc) return;
      for (const line of projectLines(doc, transform)) {
        ctx.beginPath();
        line.pixels.forEach(([x, y], i) => {
          const px = (x + 0.5) * SCALE;
          const py = (imgHeight - 1 - y + 0.5) * SCALE;
          if (i === 0) ctx.moveTo(px, py);
          else ctx.lineTo(px, py);
        });
        ctx.strokeStyle = color;
        ctx.lineWidth = 2;
        ctx.stroke();
      }
    };
    if (this.st.overlays.has("tracks")) draw(this.tracks, "#ffffff");
    if (this.st.overlays.has("eddies")) draw(this.eddies, "#00e5ff");
  }

  updateReadout(lo: number, hi: number) {
    const t = this.index.times[this.st.timeIdx];
    const axis = this.index.metadata.sliceAxis;
    const coords = axis === "depth" ? this.index.metadata.axes.depth : this.index.metadata.axes.lon;
    el<HTMLSpanElement>("readout").textContent =
      `t=${t}  ${axis}=${coords[this.st.sliceIdx]}  field=${this.st.field}  ` +
      `range=[${lo.toPrecision(4)}, ${hi.toPrecision(4)}]`;
  }

  showProbe(col: number, row: number) {
    const value = this.current ? valueAt(this.current, col, row) : NaN;
    const where = this.st.probe;
    el<HTMLSpanElement>("probe-readout").textContent = where
      ? `probe (${where.lon.toFixed(3)}, ${where.lat.toFixed(3)}) = ${Number.isNaN(value) ? "land" : value}`
      : "";
    if (this.profile && where) {
      const near =
        Math.abs(this.profile.position.lon - where.lon) < 1.0 &&
        Math.abs(this.profile.position.lat - where.lat) < 1.0;
      this.drawProfile(near ? this.profile : null);
    }
  }

  drawProfile(doc: ProfileDoc | null) {
    const canvas = el<HTMLCanvasElement>("profile");
    const ctx = canvas.getContext("2d")!;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (!doc) {
      ctx.fillStyle = "#888";
      ctx.fillText("no exported profile at this position", 10, 20);
      return;
    }
    const field = this.index.fields.includes(this.st.field) ? this.st.field : this.index.fields[0];
    const lines = chartLines(doc, field, canvas.width, canvas.height);
    const palette = ["#ffb000", "#00b4d8", "#e63946", "#52b788"];
    lines.forEach((line, k) => {
      ctx.beginPath();
      line.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
      ctx.strokeStyle = palette[k % palette.length];
      ctx.lineWidth = 1.5;
      ctx.stroke();
    });
    ctx.fillStyle = "#ccc";
    ctx.fillText(`${field} vs depth at (${doc.position.lon}, ${doc.position.lat})`, 10, 12);
  }
}

new Viewer().start().catch((err) => banner(`failed to open database: ${err}`));
