/**
 * Minimal PNG decoder for the float-image databases: 8-bit RGBA,
 * non-interlaced, which is exactly what the generator writes.
 *
 * Decoding goes through DecompressionStream plus our own scanline
 * unfiltering instead of a canvas: drawing onto a canvas premultiplies
 * alpha, which destroys the low-alpha byte patterns that float-packed
 * pixels depend on. This path is lossless by construction.
 */

export interface RawImage {
  width: number;
  height: number;
  rgba: Uint8Array;
}

const SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

function u32(bytes: Uint8Array, off: number): number {
  return ((bytes[off] << 24) | (bytes[off + 1] << 16) | (bytes[off + 2] << 8) | bytes[off + 3]) >>> 0;
}

async function inflate(zlibData: Uint8Array): Promise<Uint8Array> {
  const ds = new DecompressionStream("deflate");
  const stream = new Blob([zlibData as BlobPart]).stream().pipeThrough(ds);
  const buf = await new Response(stream).arrayBuffer();
  return new Uint8Array(buf);
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

function unfilter(raw: Uint8Array, width: number, height: number, bpp: number): Uint8Array {
  const stride = width * bpp;
  const out = new Uint8Array(stride * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const src = y * (stride + 1) + 1;
    const dst = y * stride;
    for (let x = 0; x < stride; x++) {
      const value = raw[src + x];
      const left = x >= bpp ? out[dst + x - bpp] : 0;
      const up = y > 0 ? out[dst + x - stride] : 0;
      const upLeft = y > 0 && x >= bpp ? out[dst + x - bpp - stride] : 0;
      let recon: number;
      switch (filter) {
        case 0: recon = value; break;
        case 1: recon = value + left; break;
        case 2: recon = value + up; break;
        case 3: recon = value + ((left + up) >> 1); break;
        case 4: recon = value + paeth(left, up, upLeft); break;
        default: throw new Error(`unsupported PNG filter ${filter} on row ${y}`);
      }
      out[dst + x] = recon & 0xff;
    }
  }
  return out;
}

export async function decodePng(bytes: Uint8Array): Promise<RawImage> {
  for (let i = 0; i < SIGNATURE.length; i++) {
    if (bytes[i] !== SIGNATURE[i]) throw new Error("not a PNG file");
  }
  let width = 0;
  let height = 0;
  const idat: Uint8Array[] = [];
  let off = 8;
  while (off < bytes.length) {
    const length = u32(bytes, off);
    const kind = String.fromCharCode(bytes[off + 4], bytes[off + 5], bytes[off + 6], bytes[off + 7]);
    const data = bytes.subarray(off + 8, off + 8 + length);
    if (kind === "IHDR") {
      width = u32(data, 0);
      height = u32(data, 4);
      const bitDepth = data[8];
      const colorType = data[9];
      const interlace = data[12];
      if (bitDepth !== 8 || colorType !== 6 || interlace !== 0) {
        throw new Error(
          `unsupported PNG layout (bit depth ${bitDepth}, color type ${colorType}, interlace ${interlace}); expected 8-bit RGBA non-interlaced`,
        );
      }
    } else if (kind === "IDAT") {
      idat.push(data);
    } else if (kind === "IEND") {
      break;
    }
    off += 12 + length;
  }
  if (!width || !height) throw new Error("PNG missing IHDR");
  const zlen = idat.reduce((n, c) => n + c.length, 0);
  const z = new Uint8Array(zlen);
  let zo = 0;
  for (const chunk of idat) {
    z.set(chunk, zo);
    zo += chunk.length;
  }
  const raw = await inflate(z);
  const expected = height * (width * 4 + 1);
  if (raw.length !== expected) {
    throw new Error(`PNG payload is ${raw.length} bytes, expected ${expected}`);
  }
  return { width, height, rgba: unfilter(raw, width, height, 4) };
}
