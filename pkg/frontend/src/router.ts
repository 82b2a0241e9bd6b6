/** Hash-based routes for the three pages.
 *
 * The service serves this app from a single static page, so navigation
 * lives in the fragment: #/ (list), #/data/{id}, #/view/{id}?s=…&t=….
 * The view route's query carries the interactive state, which is what
 * makes a deep link restore scheme, threshold, camera and mode.
 */
import type { ViewerState } from "./state";

export type Route =
  | { page: "list" }
  | { page: "data"; id: string }
  | { page: "view"; id: string; query: URLSearchParams };

export function parseHash(hash: string): Route {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  const [path, queryStr = ""] = raw.split("?", 2);
  const parts = path.split("/").filter((p) => p.length > 0);
  if (parts.length === 2 && parts[0] === "data") {
    return { page: "data", id: decodeURIComponent(parts[1]) };
  }
  if (parts.length === 2 && parts[0] === "view") {
    return { page: "view", id: decodeURIComponent(parts[1]), query: new URLSearchParams(queryStr) };
  }
  return { page: "list" };
}

export function formatRoute(route: Route): string {
  switch (route.page) {
    case "list":
      return "#/";
    case "data":
      return `#/data/${encodeURIComponent(route.id)}`;
    case "view": {
      const q = route.query.toString();
      return `#/view/${encodeURIComponent(route.id)}${q ? `?${q}` : ""}`;
    }
  }
}

/** First click: a dataset card on the list opens its data preview. */
export function listCardTarget(id: string): string {
  return formatRoute({ page: "data", id });
}

/** Second click: the image on the data preview opens the interactive view. */
export function dataImageTarget(id: string): string {
  return formatRoute({ page: "view", id, query: new URLSearchParams() });
}

const MODES = new Set(["surface", "additive"]);

/** Interactive-state overrides carried by a deep link. */
export function viewStateFromQuery(query: URLSearchParams): Partial<ViewerState> {
  const out: Partial<ViewerState> = {};
  const s = Number(query.get("s"));
  if ([128, 256, 512].includes(s)) out.activeScheme = s;
  const t = Number(query.get("t"));
  if (query.has("t") && Number.isInteger(t) && t >= 0 && t <= 255) out.threshold = t;
  const az = Number(query.get("az"));
  if (query.has("az") && Number.isFinite(az)) out.azimuthDeg = ((az % 360) + 360) % 360;
  const el = Number(query.get("el"));
  if (query.has("el") && Number.isFinite(el)) out.elevationDeg = Math.min(89, Math.max(-89, el));
  const m = query.get("m");
  if (m && MODES.has(m)) out.mode = m as ViewerState["mode"];
  return out;
}

export function queryFromViewState(state: ViewerState): URLSearchParams {
  const q = new URLSearchParams();
  if (state.activeScheme > 0) q.set("s", String(state.activeScheme));
  q.set("t", String(state.threshold));
  q.set("az", state.azimuthDeg.toFixed(1));
  if (state.elevationDeg !== 0) q.set("el", state.elevationDeg.toFixed(1));
  if (state.mode !== "surface") q.set("m", state.mode);
  return q;
}
