import { readFile } from "node:fs/promises";
import { join } from "node:path";

export const FIXTURES = join(__dirname, "fixtures");
export const DB = join(FIXTURES, "viewer_data");

export async function fixtureBytes(...parts: string[]): Promise<Uint8Array> {
  const buf = await readFile(join(FIXTURES, ...parts));
  return new Uint8Array(buf.buffer, buf.byteOffset, buf.byteLength);
}

export async function fixtureText(...parts: string[]): Promise<string> {
  return readFile(join(FIXTURES, ...parts), "utf-8");
}

export function asUint32(values: Float32Array): Uint32Array {
  return new Uint32Array(values.buffer, values.byteOffset, values.length);
}

export function expectedFloats(bin: Uint8Array): Float32Array {
  const copy = new Uint8Array(bin.length);
  copy.set(bin);
  return new Float32Array(copy.buffer);
}
