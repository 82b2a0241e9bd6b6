/** End-to-end acceptance against the real service.
 *
 * Spawns `ctprev serve` on the committed fixture bundle and checks the
 * viewer contract from the outside:
 *   - the progressive load order (manifest, every 128 atlas, then 256)
 *     is visible in the service's own access log
 *   - the viewer's slice addressing agrees with the served layouts for
 *     every index of every scheme
 *   - the raycaster emulator agrees with the pipeline's renderer on the
 *     served 128 volume to >= 97% of the silhouette
 *   - the interactive view is two clicks from the dataset list, and a
 *     deep link carries the restorable state
 */
import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { Api, HttpError, type DatasetManifest } from "../src/api";
import { sliceCell } from "../src/addressing";
import { progressiveLoad, type AtlasFetcher } from "../src/progressive";
import { renderFrameCPU } from "../src/shader";
import type { AtlasVolume } from "../src/volumeAtlas";
import { dataImageTarget, listCardTarget, parseHash, viewStateFromQuery } from "../src/router";
import { initialState } from "../src/state";
import {
  BUNDLES,
  DATASET_ID,
  decodePng,
  readFixture,
  readFixtureJson,
  silhouetteAgreement,
} from "./helpers";

const PORT = 21000 + (process.pid % 2000);
const BASE = `http://127.0.0.1:${PORT}`;

const nodeFetcher: AtlasFetcher = {
  async fetchBytes(url) {
    const res = await fetch(url);
    if (!res.ok) throw new HttpError(res.status, url);
    return new Uint8Array(await res.arrayBuffer());
  },
  async decode(bytes) {
    return decodePng(bytes);
  },
};

interface LogEntry {
  method: string;
  path: string;
  status: number;
}

let server: ChildProcess | null = null;
let stderrBuf = "";
const summary: string[] = [];

/** Run the block and keep a PASS/FAIL line for the report printed at the end. */
async function check(name: string, fn: () => void | Promise<void>): Promise<void> {
  try {
    await fn();
    summary.push(`criterion 11 (${name}): PASS`);
  } catch (err) {
    summary.push(`criterion 11 (${name}): FAIL`);
    throw err;
  }
}

// shared across the sequential tests below
const api = new Api(BASE);
let manifest: DatasetManifest;
const volumes = new Map<number, AtlasVolume>();

beforeAll(async () => {
  server = spawn(
    process.env.CTPREV_BIN ?? "ctprev",
    ["serve", "--root", BUNDLES, "--host", "127.0.0.1", "--port", String(PORT)],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  server.stderr?.on("data", (chunk: Buffer) => {
    stderrBuf += chunk.toString();
  });
  const deadline = Date.now() + 45_000;
  for (;;) {
    if (server.exitCode !== null) {
      throw new Error(`service exited early (${server.exitCode}): ${stderrBuf}`);
    }
    try {
      const res = await fetch(`${BASE}/api/datasets`);
      if (res.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service never came up on ${BASE}: ${stderrBuf}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
}, 60_000);

afterAll(() => {
  server?.kill("SIGTERM");
  for (const line of summary) console.log(line);
});

describe("service-backed viewer acceptance", () => {
  it(
    "loads progressively and the order is visible in the access log",
    async () => {
      await check("progressive load order in access log", async () => {
        const rows = await api.listDatasets();
        const row = rows.find((r) => r.id === DATASET_ID);
        expect(row, "fixture bundle is served").toBeDefined();
        expect(row!.thumbnail_url).toBeTruthy();

        manifest = await api.manifest(DATASET_ID);
        expect(manifest.interactive).not.toBeNull();

        const seen: number[] = [];
        await progressiveLoad(
          api,
          manifest,
          (s, vol) => {
            seen.push(s);
            volumes.set(s, vol);
          },
          nodeFetcher,
        );
        expect(seen).toEqual([128, 256]);

        const log = (await (await fetch(`${BASE}/api/_log`)).json()) as LogEntry[];
        const scoped = log.filter((e) => e.path.startsWith(`/api/datasets/${DATASET_ID}`));
        for (const e of scoped) {
          expect(e.method).toBe("GET");
          expect(e.status).toBe(200);
        }
        const at = (p: string) => scoped.findIndex((e) => e.path === p);
        const manifestIdx = at(`/api/datasets/${DATASET_ID}`);
        const idx128 = [0, 1].map((i) =>
          at(`/api/datasets/${DATASET_ID}/interactive/128/sm_128_${i}.png`),
        );
        const idx256 = [0, 1, 2, 3].map((i) =>
          at(`/api/datasets/${DATASET_ID}/interactive/256/sm_256_${i}.png`),
        );
        expect(manifestIdx).toBeGreaterThanOrEqual(0);
        for (const i of [...idx128, ...idx256]) expect(i).toBeGreaterThanOrEqual(0);
        expect(manifestIdx).toBeLessThan(Math.min(...idx128));
        expect(Math.max(...idx128)).toBeLessThan(Math.min(...idx256));
        // nothing asked for the opt-in 512 scheme
        expect(log.some((e) => e.path.includes("/interactive/512/"))).toBe(false);
      });
    },
    120_000,
  );

  it("addresses every slice of every served scheme like the encoder", async () => {
    await check("addressing parity", async () => {
      const table = readFixtureJson<Record<string, [number, number, number][]>>("parity.json");
      expect(manifest, "manifest fetched by the previous test").toBeDefined();
      const inter = manifest.interactive!;
      for (const s of inter.schemes) {
        const detail = inter.schemes_detail[String(s)];
        expect(detail, `schemes_detail for ${s}`).toBeDefined();
        const rows = table[String(s)];
        expect(rows).toHaveLength(s);
        for (let z = 0; z < s; z++) {
          const cell = sliceCell(z, detail.scheme);
          expect([cell.map, cell.cellX, cell.cellY]).toEqual(rows[z]);
        }
      }
    });
  });

  it(
    "raycasts the served coarse volume in agreement with the pipeline",
    async () => {
      await check("raycast silhouette agreement >= 97%", async () => {
        const spec = readFixtureJson<{
          image_dim: number;
          steps: number;
          gain: number;
          frames: { file: string; azimuth: number; mode: "surface" | "additive"; threshold: number }[];
        }>("frames", "params.json");
        const vol = volumes.get(128);
        expect(vol, "128 volume fetched from the live service").toBeDefined();
        const frame = spec.frames[0];
        const ref = decodePng(readFixture("frames", frame.file));
        const got = renderFrameCPU(vol!, {
          azimuthDeg: frame.azimuth,
          elevationDeg: 0,
          imageDim: spec.image_dim,
          steps: spec.steps,
          mode: frame.mode,
          threshold: frame.threshold,
          gain: spec.gain,
        });
        const agreement = silhouetteAgreement(got, ref.gray);
        expect(agreement).toBeGreaterThanOrEqual(0.97);
        summary.push(
          `  silhouette agreement on ${frame.file}: ${(agreement * 100).toFixed(2)}%`,
        );
      });
    },
    120_000,
  );

  it("reaches the interactive view in two clicks and honors deep links", async () => {
    await check("two-click navigation and deep links", async () => {
      const rows = await api.listDatasets();
      const id = rows[0].id;
      const clicks = [listCardTarget(id), dataImageTarget(id)];
      expect(clicks).toHaveLength(2);
      expect(parseHash(clicks[0])).toEqual({ page: "data", id });
      const second = parseHash(clicks[1]);
      expect(second.page).toBe("view");

      // a dead id turns into the 404 the app converts to list-plus-notice
      await expect(api.manifest("no-such-dataset")).rejects.toMatchObject({ status: 404 });

      // the slider starts at the value the pipeline suggested
      const state = initialState(manifest);
      expect(state.threshold).toBe(manifest.interactive!.thresholds["128"]);
      expect(state.loadingStage).toBe("low");

      // a shared link restores what the first session was looking at
      const link = parseHash(`#/view/${id}?t=140&az=211.5&el=-12&m=additive`);
      expect(link.page).toBe("view");
      const restored = viewStateFromQuery(
        link.page === "view" ? link.query : new URLSearchParams(),
      );
      expect(restored).toEqual({
        threshold: 140,
        azimuthDeg: 211.5,
        elevationDeg: -12,
        mode: "additive",
      });
    });
  });
});
