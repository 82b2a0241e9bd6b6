/** Shared fixture access for the node-side tests.
 *
 * The browser decodes atlases through createImageBitmap; here pngjs plays
 * that role, feeding the same byte layout into the same AtlasVolume.
 */
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { PNG } from "pngjs";
import type { SchemeManifest } from "../src/api";
import { AtlasVolume, type DecodedAtlas } from "../src/volumeAtlas";

export const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
export const BUNDLES = join(FIXTURES, "bundles");
export const DATASET_ID = "fixture-128";

export function readFixture(...parts: string[]): Uint8Array {
  return new Uint8Array(readFileSync(join(FIXTURES, ...parts)));
}

export function readFixtureJson<T>(...parts: string[]): T {
  return JSON.parse(readFileSync(join(FIXTURES, ...parts), "utf8")) as T;
}

/** PNG bytes to the red channel, like the browser path but via pngjs. */
export function decodePng(bytes: Uint8Array): DecodedAtlas {
  const png = PNG.sync.read(Buffer.from(bytes));
  const gray = new Uint8Array(png.width * png.height);
  for (let i = 0; i < gray.length; i++) gray[i] = png.data[i * 4];
  return { width: png.width, height: png.height, gray };
}

export function schemeManifest(scheme: number): SchemeManifest {
  return readFixtureJson("bundles", DATASET_ID, "interactive", String(scheme), "manifest.json");
}

/** The fixture bundle's volume at one scheme, decoded straight from disk. */
export function fixtureVolume(scheme: number): AtlasVolume {
  const man = schemeManifest(scheme);
  const atlases = man.atlases.map((name) =>
    decodePng(readFixture("bundles", DATASET_ID, "interactive", String(scheme), name)),
  );
  return new AtlasVolume(man.scheme, atlases);
}

/** Fraction of pixels where both images agree on lit-vs-dark. */
export function silhouetteAgreement(a: Uint8Array, b: Uint8Array): number {
  if (a.length !== b.length) throw new Error("image size mismatch");
  let same = 0;
  for (let i = 0; i < a.length; i++) {
    if (a[i] > 0 === b[i] > 0) same++;
  }
  return same / a.length;
}

export function meanAbsDiff(a: Uint8Array, b: Uint8Array): number {
  let sum = 0;
  for (let i = 0; i < a.length; i++) sum += Math.abs(a[i] - b[i]);
  return sum / a.length;
}
