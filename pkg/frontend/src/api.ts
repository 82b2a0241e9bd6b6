/** Typed GET-only client for the preview service. The viewer never mutates
 * server data; everything here is a read.
 */
import type { Scheme } from "./addressing";

export interface DatasetRow {
  id: string;
  name: string;
  dims: [number, number, number];
  thumbnail_url: string | null;
}

export interface CircleJson {
  cx: number;
  cy: number;
  r: number;
  votes: number;
}

export interface Sidecar {
  azimuth: number;
  entropy: number;
  threshold: number | null;
  circle: CircleJson | null;
  mode: "surface" | "additive";
  warnings: string[];
}

export interface SchemeManifest {
  scheme: Scheme;
  atlases: string[];
}

export interface DataManifest extends SchemeManifest {
  product: string;
  filtered_bins: number[];
}

export interface InteractiveManifest {
  schemes: number[];
  container: CircleJson | null;
  thresholds: Record<string, number | null>;
  warnings: string[];
  schemes_detail: Record<string, SchemeManifest>;
}

export interface DatasetManifest {
  id: string;
  name: string;
  dims: [number, number, number];
  raw_bytes: number;
  thumbnail_url: string | null;
  sidecar: Sidecar | null;
  data: DataManifest | null;
  interactive: InteractiveManifest | null;
}

export class HttpError extends Error {
  constructor(
    readonly status: number,
    readonly url: string,
  ) {
    super(`GET ${url} -> ${status}`);
  }
}

async function getJson<T>(url: string, fetchFn: typeof fetch): Promise<T> {
  const res = await fetchFn(url);
  if (!res.ok) throw new HttpError(res.status, url);
  return (await res.json()) as T;
}

export class Api {
  constructor(
    readonly base: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  listDatasets(): Promise<DatasetRow[]> {
    return getJson(`${this.base}/api/datasets`, this.fetchFn);
  }

  manifest(id: string): Promise<DatasetManifest> {
    return getJson(`${this.base}/api/datasets/${encodeURIComponent(id)}`, this.fetchFn);
  }

  dataAtlasUrl(id: string, atlasName: string): string {
    return `${this.base}/api/datasets/${encodeURIComponent(id)}/data/${atlasName}`;
  }

  interactiveAtlasUrl(id: string, scheme: number, atlasName: string): string {
    return `${this.base}/api/datasets/${encodeURIComponent(id)}/interactive/${scheme}/${atlasName}`;
  }
}
