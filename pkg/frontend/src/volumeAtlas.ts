/** Decoded slicemap atlases held as flat grayscale buffers.
 *
 * The interactive product always encodes an s x s x s cube, so the volume
 * carried here is cubic by construction. `fetch` is the single point where
 * voxel coordinates turn into atlas texels; the raycaster (GPU and CPU
 * alike) goes through the same arithmetic.
 */
import { checkScheme, type Scheme } from "./addressing";

export interface DecodedAtlas {
  width: number;
  height: number;
  /** one byte per pixel, row-major */
  gray: Uint8Array;
}

export class AtlasVolume {
  constructor(
    readonly scheme: Scheme,
    readonly atlases: DecodedAtlas[],
  ) {
    checkScheme(scheme);
    if (atlases.length !== scheme.maps) {
      throw new Error(`${atlases.length} atlases for a ${scheme.maps}-map scheme`);
    }
    for (const a of atlases) {
      if (a.width !== scheme.atlas || a.height !== scheme.atlas) {
        throw new Error(`atlas is ${a.width}x${a.height}, scheme wants ${scheme.atlas}`);
      }
      if (a.gray.length !== a.width * a.height) {
        throw new Error("atlas buffer length does not match its dimensions");
      }
    }
  }

  /** Raw voxel byte at integer (x, y, z); coordinates must be in range. */
  fetch(x: number, y: number, z: number): number {
    const sch = this.scheme;
    const perMap = sch.grid * sch.grid;
    const m = Math.floor(z / perMap);
    const w = z - m * perMap;
    const cy = Math.floor(w / sch.grid);
    const cx = w - cy * sch.grid;
    const a = this.atlases[m];
    return a.gray[(cy * sch.s + y) * sch.atlas + (cx * sch.s + x)];
  }
}
