/** Slicemap atlas layout: where slice z of an s-cube lives in which atlas.
 *
 * This must agree exactly with the encoder on the server; the parity test
 * checks every index of every scheme against a table generated there.
 */

export interface Scheme {
  /** cube edge: the encoded volume is s x s x s */
  s: number;
  /** atlas edge in pixels */
  atlas: number;
  /** cells per atlas row (and column) */
  grid: number;
  /** number of atlas images */
  maps: number;
}

export interface Cell {
  map: number;
  cellX: number;
  cellY: number;
}

export function checkScheme(sch: Scheme): void {
  if (sch.grid * sch.s !== sch.atlas) {
    throw new Error(`grid ${sch.grid} x slice ${sch.s} != atlas ${sch.atlas}`);
  }
  const perMap = sch.grid * sch.grid;
  if (sch.maps !== Math.ceil(sch.s / perMap)) {
    throw new Error(`${sch.maps} maps cannot hold ${sch.s} slices at ${perMap}/map`);
  }
}

/** (map, cellX, cellY) of slice `index`; slices fill a map row-major. */
export function sliceCell(index: number, sch: Scheme): Cell {
  if (!Number.isInteger(index) || index < 0 || index >= sch.s) {
    throw new RangeError(`slice index ${index} outside [0, ${sch.s})`);
  }
  const perMap = sch.grid * sch.grid;
  const map = Math.floor(index / perMap);
  const within = index % perMap;
  return { map, cellX: within % sch.grid, cellY: Math.floor(within / sch.grid) };
}

/** Atlas pixel coordinates of voxel (x, y) on slice z. */
export function atlasTexel(
  x: number,
  y: number,
  z: number,
  sch: Scheme,
): { map: number; px: number; py: number } {
  const c = sliceCell(z, sch);
  return { map: c.map, px: c.cellX * sch.s + x, py: c.cellY * sch.s + y };
}

export function atlasNames(sch: Scheme): string[] {
  const names: string[] = [];
  for (let i = 0; i < sch.maps; i++) names.push(`sm_${sch.s}_${i}.png`);
  return names;
}
