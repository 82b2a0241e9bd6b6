/** Interactive-view state and the rules for changing it.
 *
 * Pure data plus pure transitions, so the invariants are testable without
 * a browser: the threshold starts at the manifest's suggested value, the
 * active scheme only ever advances, and a scheme swap never touches the
 * camera or the threshold.
 */
import type { DatasetManifest } from "./api";
import type { RenderMode } from "./shader";

export type LoadingStage = "low" | "high" | "done";

export interface ViewerState {
  datasetId: string;
  /** 0 until the first scheme is resident */
  activeScheme: number;
  threshold: number;
  azimuthDeg: number;
  elevationDeg: number;
  mode: RenderMode;
  loadingStage: LoadingStage;
}

/** The manifest's suggested global threshold: the lowest scheme's value,
 * falling back through finer schemes, then the thumbnail sidecar, then
 * midscale when every build stage degraded.
 */
export function defaultThreshold(manifest: DatasetManifest): number {
  const inter = manifest.interactive;
  if (inter) {
    for (const s of [...inter.schemes].sort((a, b) => a - b)) {
      const t = inter.thresholds[String(s)];
      if (t !== null && t !== undefined) return t;
    }
  }
  const side = manifest.sidecar?.threshold;
  return side ?? 128;
}

export function initialState(manifest: DatasetManifest): ViewerState {
  return {
    datasetId: manifest.id,
    activeScheme: 0,
    threshold: defaultThreshold(manifest),
    azimuthDeg: 0,
    elevationDeg: 0,
    mode: "surface",
    loadingStage: "low",
  };
}

/** A fully fetched scheme arrived. Returns the advanced state, or null if
 * the arrival is stale (the view already shows this scheme or a finer
 * one) and must not replace it. Camera and threshold carry over.
 */
export function applyScheme(
  state: ViewerState,
  scheme: number,
  plannedMax: number,
): ViewerState | null {
  if (scheme <= state.activeScheme) return null;
  return {
    ...state,
    activeScheme: scheme,
    loadingStage: scheme >= plannedMax ? "done" : "high",
  };
}

export function setThreshold(state: ViewerState, threshold: number): ViewerState {
  const t = Math.min(255, Math.max(0, Math.round(threshold)));
  return { ...state, threshold: t };
}

export function setOrbit(state: ViewerState, azimuthDeg: number, elevationDeg: number): ViewerState {
  const az = ((azimuthDeg % 360) + 360) % 360;
  const el = Math.min(89, Math.max(-89, elevationDeg));
  return { ...state, azimuthDeg: az, elevationDeg: el };
}

export function setMode(state: ViewerState, mode: RenderMode): ViewerState {
  return { ...state, mode };
}
