/** Progressive atlas loading: coarse scheme first, finer ones behind it.
 *
 * Fetches are sequential, so the service access log shows the contract
 * order: manifest, every low-scheme atlas, then the next scheme's atlases.
 * A scheme is handed to `onSchemeReady` only when all of its atlases have
 * arrived and decoded; an abort mid-scheme therefore leaves the view on
 * whatever was complete before it.
 */
import type { Api, DatasetManifest, SchemeManifest } from "./api";
import { AtlasVolume, type DecodedAtlas } from "./volumeAtlas";

export interface AtlasFetcher {
  fetchBytes(url: string, signal?: AbortSignal): Promise<Uint8Array>;
  decode(bytes: Uint8Array): Promise<DecodedAtlas>;
}

export interface ProgressiveOpts {
  /** also fetch the largest scheme (off by default; it is behind a toggle) */
  highDetail?: boolean;
  signal?: AbortSignal;
  /** attempts per atlas fetch, 1 = no retry */
  attempts?: number;
  retryDelayMs?: (attempt: number) => number;
  sleep?: (ms: number) => Promise<void>;
}

export class AbortedError extends Error {
  constructor() {
    super("load aborted");
  }
}

const HIGH_DETAIL_SCHEME = 512;

export function plannedSchemes(manifest: DatasetManifest, highDetail: boolean): number[] {
  const all = manifest.interactive ? [...manifest.interactive.schemes].sort((a, b) => a - b) : [];
  return highDetail ? all : all.filter((s) => s !== HIGH_DETAIL_SCHEME);
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));
const defaultDelay = (attempt: number) => 250 * 2 ** attempt;

async function fetchWithRetry(
  fetcher: AtlasFetcher,
  url: string,
  opts: Required<Pick<ProgressiveOpts, "attempts" | "retryDelayMs" | "sleep">>,
  signal?: AbortSignal,
): Promise<Uint8Array> {
  let lastError: unknown;
  for (let attempt = 0; attempt < opts.attempts; attempt++) {
    if (signal?.aborted) throw new AbortedError();
    try {
      return await fetcher.fetchBytes(url, signal);
    } catch (err) {
      lastError = err;
      if (signal?.aborted) throw new AbortedError();
      if (attempt + 1 < opts.attempts) await opts.sleep(opts.retryDelayMs(attempt));
    }
  }
  throw lastError instanceof Error ? lastError : new Error(String(lastError));
}

async function loadScheme(
  api: Api,
  datasetId: string,
  s: number,
  detail: SchemeManifest,
  fetcher: AtlasFetcher,
  opts: Required<Pick<ProgressiveOpts, "attempts" | "retryDelayMs" | "sleep">>,
  signal?: AbortSignal,
): Promise<AtlasVolume> {
  const atlases: DecodedAtlas[] = [];
  for (const name of detail.atlases) {
    const bytes = await fetchWithRetry(
      fetcher,
      api.interactiveAtlasUrl(datasetId, s, name),
      opts,
      signal,
    );
    if (signal?.aborted) throw new AbortedError();
    atlases.push(await fetcher.decode(bytes));
  }
  return new AtlasVolume(detail.scheme, atlases);
}

/** Fetch exactly one scheme, e.g. the high-detail one behind its toggle. */
export async function loadOneScheme(
  api: Api,
  manifest: DatasetManifest,
  s: number,
  fetcher: AtlasFetcher,
  opts: ProgressiveOpts = {},
): Promise<AtlasVolume> {
  const detail = manifest.interactive?.schemes_detail[String(s)];
  if (!detail) throw new Error(`dataset ${manifest.id} has no scheme ${s}`);
  const retry = {
    attempts: opts.attempts ?? 3,
    retryDelayMs: opts.retryDelayMs ?? defaultDelay,
    sleep: opts.sleep ?? defaultSleep,
  };
  return loadScheme(api, manifest.id, s, detail, fetcher, retry, opts.signal);
}

/** Load schemes coarse to fine, announcing each completed one. Rejects on
 * abort (AbortedError) or when an atlas stays unreachable after retries;
 * schemes announced before the failure remain valid.
 */
export async function progressiveLoad(
  api: Api,
  manifest: DatasetManifest,
  onSchemeReady: (scheme: number, volume: AtlasVolume) => void,
  fetcher: AtlasFetcher,
  opts: ProgressiveOpts = {},
): Promise<void> {
  const inter = manifest.interactive;
  if (!inter) throw new Error(`dataset ${manifest.id} has no interactive preview`);
  const retry = {
    attempts: opts.attempts ?? 3,
    retryDelayMs: opts.retryDelayMs ?? defaultDelay,
    sleep: opts.sleep ?? defaultSleep,
  };
  for (const s of plannedSchemes(manifest, opts.highDetail ?? false)) {
    const detail = inter.schemes_detail[String(s)];
    if (!detail) continue; // scheme listed but not built; skip, never block
    const volume = await loadScheme(api, manifest.id, s, detail, fetcher, retry, opts.signal);
    if (opts.signal?.aborted) throw new AbortedError();
    onSchemeReady(s, volume);
  }
}
