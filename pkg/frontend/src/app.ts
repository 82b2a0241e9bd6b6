/** Page controller: wires the hash router, the API client, progressive
 * loading and the raycaster into the three pages.
 *
 * list (#/)            grid of dataset cards with thumbnails
 * data (#/data/{id})   filtered slicemap browser, one click from the list
 * view (#/view/{id})   interactive raycast view, one more click
 *
 * Every page tears down before the next renders, and the interactive
 * page's fetches ride an AbortController tied to that teardown, so a
 * navigation can never leave a stale scheme arriving into the new page.
 */
import { Api, HttpError, type DatasetManifest, type DatasetRow } from "./api";
import { sliceCell } from "./addressing";
import {
  AbortedError,
  loadOneScheme,
  plannedSchemes,
  progressiveLoad,
  type AtlasFetcher,
} from "./progressive";
import { GLRenderer } from "./raycastGL";
import { renderFrameCPU, type RenderParams } from "./shader";
import type { AtlasVolume } from "./volumeAtlas";
import {
  applyScheme,
  initialState,
  setMode,
  setOrbit,
  setThreshold,
  type ViewerState,
} from "./state";
import {
  dataImageTarget,
  formatRoute,
  listCardTarget,
  parseHash,
  queryFromViewState,
  viewStateFromQuery,
  type Route,
} from "./router";

/** Decode PNG bytes to the red channel without color management, so the
 * bytes the shader samples are exactly the bytes the service stored.
 */
export function browserAtlasFetcher(fetchFn: typeof fetch = fetch): AtlasFetcher {
  return {
    async fetchBytes(url, signal) {
      const res = await fetchFn(url, signal ? { signal } : undefined);
      if (!res.ok) throw new HttpError(res.status, url);
      return new Uint8Array(await res.arrayBuffer());
    },
    async decode(bytes) {
      const blob = new Blob([bytes as BlobPart], { type: "image/png" });
      const bmp = await createImageBitmap(blob, { colorSpaceConversion: "none" });
      const cv = new OffscreenCanvas(bmp.width, bmp.height);
      const ctx = cv.getContext("2d", { willReadFrequently: true });
      if (!ctx) throw new Error("2d context unavailable");
      ctx.drawImage(bmp, 0, 0);
      bmp.close();
      const rgba = ctx.getImageData(0, 0, cv.width, cv.height).data;
      const gray = new Uint8Array(cv.width * cv.height);
      for (let i = 0; i < gray.length; i++) gray[i] = rgba[i * 4];
      return { width: cv.width, height: cv.height, gray };
    },
  };
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const c of children) node.append(c);
  return node;
}

function dimsLabel(dims: [number, number, number]): string {
  return `${dims[0]} x ${dims[1]} x ${dims[2]} voxels`;
}

function byteLabel(n: number): string {
  if (n >= 1 << 30) return `${(n / (1 << 30)).toFixed(1)} GB`;
  if (n >= 1 << 20) return `${(n / (1 << 20)).toFixed(1)} MB`;
  if (n >= 1 << 10) return `${(n / (1 << 10)).toFixed(1)} KB`;
  return `${n} B`;
}

export class App {
  private teardown: (() => void) | null = null;
  private pendingNotice: string | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: Api = new Api(),
    private readonly fetcher: AtlasFetcher = browserAtlasFetcher(),
  ) {}

  start(): void {
    window.addEventListener("hashchange", () => this.render(parseHash(location.hash)));
    this.render(parseHash(location.hash));
  }

  render(route: Route): void {
    this.teardown?.();
    this.teardown = null;
    this.root.replaceChildren();
    if (route.page === "list") void this.listPage();
    else if (route.page === "data") void this.dataPage(route.id);
    else void this.viewPage(route.id, route.query);
  }

  /** Navigate to the list and show a one-shot banner there. */
  private backToList(notice: string): void {
    this.pendingNotice = notice;
    if (parseHash(location.hash).page === "list") this.render({ page: "list" });
    else location.hash = "#/";
  }

  private header(title: string, backTo?: string): HTMLElement {
    const kids: (Node | string)[] = [];
    if (backTo) kids.push(el("a", { class: "back", href: backTo }, ["← datasets"]));
    kids.push(el("h1", {}, [title]));
    return el("header", {}, kids);
  }

  private async listPage(): Promise<void> {
    const page = el("section", { class: "page" }, [this.header("Datasets")]);
    if (this.pendingNotice) {
      page.append(el("p", { class: "notice", role: "alert" }, [this.pendingNotice]));
      this.pendingNotice = null;
    }
    const body = el("div", {}, [el("p", { class: "muted" }, ["Loading…"])]);
    page.append(body);
    this.root.replaceChildren(page);

    let rows: DatasetRow[];
    try {
      rows = await this.api.listDatasets();
    } catch (err) {
      body.replaceChildren(el("p", { class: "notice" }, [`Could not reach the service: ${err}`]));
      return;
    }
    if (rows.length === 0) {
      body.replaceChildren(
        el("div", { class: "empty" }, [
          el("p", {}, ["No datasets yet."]),
          el("p", { class: "muted" }, [
            "Build one with `ctprev build` and point the service at its root.",
          ]),
        ]),
      );
      return;
    }
    const grid = el("div", { class: "grid" });
    for (const row of rows) {
      const card = el("a", { class: "card", href: listCardTarget(row.id) });
      card.append(
        row.thumbnail_url
          ? el("img", { src: row.thumbnail_url, alt: row.name, loading: "lazy" })
          : el("div", { class: "thumb-missing" }, ["no thumbnail"]),
        el("strong", {}, [row.name]),
        el("span", { class: "muted" }, [dimsLabel(row.dims)]),
      );
      grid.append(card);
    }
    body.replaceChildren(grid);
  }

  private async dataPage(id: string): Promise<void> {
    this.root.replaceChildren(
      el("section", { class: "page" }, [
        this.header(id, "#/"),
        el("p", { class: "muted" }, ["Loading…"]),
      ]),
    );
    let manifest: DatasetManifest;
    try {
      manifest = await this.api.manifest(id);
    } catch (err) {
      if (err instanceof HttpError && err.status === 404) {
        this.backToList(`Dataset "${id}" was not found.`);
      } else {
        this.backToList(`Could not load "${id}": ${err}`);
      }
      return;
    }

    const page = el("section", { class: "page" }, [this.header(manifest.name, "#/")]);
    page.append(
      el("p", { class: "muted" }, [
        `${dimsLabel(manifest.dims)} · ${byteLabel(manifest.raw_bytes)} raw`,
      ]),
    );
    const data = manifest.data;
    if (!data) {
      page.append(el("p", { class: "notice" }, ["No filtered preview was built for this dataset."]));
      if (manifest.interactive) {
        page.append(el("p", {}, [el("a", { href: dataImageTarget(id) }, ["Open interactive view"])]));
      }
      this.root.replaceChildren(page);
      return;
    }

    const sch = data.scheme;
    const canvas = el("canvas", { width: String(sch.s), height: String(sch.s) });
    const link = el("a", {
      class: "stage-link",
      href: dataImageTarget(id),
      title: "open interactive view",
    });
    link.append(canvas);
    const slider = el("input", {
      type: "range",
      min: "0",
      max: String(sch.s - 1),
      value: String(Math.floor(sch.s / 2)),
    }) as HTMLInputElement;
    const sliceLabel = el("span", { class: "mono" });
    page.append(
      el("div", { class: "stage" }, [link]),
      el("div", { class: "controls" }, [el("label", {}, ["slice ", slider, sliceLabel])]),
      el("p", { class: "muted" }, [
        data.filtered_bins.length
          ? `artifact grey bins removed: ${data.filtered_bins.join(", ")}`
          : "no artifact grey bins were removed",
      ]),
      el("p", {}, [el("a", { href: dataImageTarget(id) }, ["Open interactive view →"])]),
    );
    this.root.replaceChildren(page);

    // one <img> per atlas map, created on first use; the browser cache and
    // the service's immutable max-age make repeat scrubbing free
    const maps = new Map<number, Promise<HTMLImageElement>>();
    const mapImage = (m: number): Promise<HTMLImageElement> => {
      let p = maps.get(m);
      if (!p) {
        p = new Promise((resolve, reject) => {
          const img = new Image();
          img.onload = () => resolve(img);
          img.onerror = () => reject(new Error(`atlas ${m} failed to load`));
          img.src = this.api.dataAtlasUrl(id, data.atlases[m]);
        });
        maps.set(m, p);
      }
      return p;
    };

    let alive = true;
    this.teardown = () => {
      alive = false;
    };
    let shown = -1;
    const drawSlice = async (z: number) => {
      sliceLabel.textContent = ` ${z} / ${sch.s - 1}`;
      const cell = sliceCell(z, sch);
      const img = await mapImage(cell.map);
      if (!alive || Number(slider.value) !== z || shown === z) return;
      shown = z;
      const ctx = canvas.getContext("2d");
      if (!ctx) return;
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(img, cell.cellX * sch.s, cell.cellY * sch.s, sch.s, sch.s, 0, 0, sch.s, sch.s);
    };
    slider.addEventListener("input", () => {
      shown = -1;
      void drawSlice(Number(slider.value));
    });
    void drawSlice(Number(slider.value));
  }

  private async viewPage(id: string, query: URLSearchParams): Promise<void> {
    this.root.replaceChildren(
      el("section", { class: "page" }, [
        this.header(id, listCardTarget(id)),
        el("p", { class: "muted" }, ["Loading…"]),
      ]),
    );
    let manifest: DatasetManifest;
    try {
      manifest = await this.api.manifest(id);
    } catch (err) {
      if (err instanceof HttpError && err.status === 404) {
        this.backToList(`Dataset "${id}" was not found.`);
      } else {
        this.backToList(`Could not load "${id}": ${err}`);
      }
      return;
    }
    if (!manifest.interactive) {
      this.backToList(`Dataset "${id}" has no interactive preview.`);
      return;
    }

    // The deep link restores threshold, camera and mode directly. A scheme
    // in the link is a wish, not a starting point: resolution still arrives
    // coarse to fine, so s=512 just pre-arms the high-detail toggle.
    const overrides = viewStateFromQuery(query);
    let highDetail = overrides.activeScheme === 512;
    delete overrides.activeScheme;
    let state: ViewerState = { ...initialState(manifest), ...overrides };

    const volumes = new Map<number, AtlasVolume>();
    const abort = new AbortController();
    let raf = 0;
    let alive = true;

    const canvas = el("canvas", { width: "512", height: "512" }) as HTMLCanvasElement;
    const requestRender = () => {
      if (!alive || raf) return;
      raf = requestAnimationFrame(() => {
        raf = 0;
        renderNow();
      });
    };
    const gl = new GLRenderer(canvas, requestRender);
    const glOk = gl.init();

    this.teardown = () => {
      alive = false;
      abort.abort();
      if (raf) cancelAnimationFrame(raf);
      gl.dispose();
    };

    const thrSlider = el("input", {
      type: "range",
      min: "0",
      max: "255",
      value: String(state.threshold),
    }) as HTMLInputElement;
    const thrLabel = el("span", { class: "mono" }, [` ${state.threshold}`]);
    const modeSurface = el("input", { type: "radio", name: "mode" }) as HTMLInputElement;
    const modeAdditive = el("input", { type: "radio", name: "mode" }) as HTMLInputElement;
    const highToggle = el("input", { type: "checkbox" }) as HTMLInputElement;
    highToggle.checked = highDetail;
    const has512 = plannedSchemes(manifest, true).includes(512);
    const stageBadge = el("span", { class: "badge" });
    const schemeRow = el("div", { class: "chips" });
    const status = el("p", { class: "muted", role: "status" }, ["fetching coarse volume…"]);

    const page = el("section", { class: "page" }, [
      this.header(manifest.name, listCardTarget(id)),
      el("div", { class: "stage" }, [canvas]),
      el("div", { class: "controls" }, [
        el("label", {}, ["threshold ", thrSlider, thrLabel]),
        el("span", { class: "modes" }, [
          el("label", {}, [modeSurface, " surface"]),
          el("label", {}, [modeAdditive, " additive"]),
        ]),
        ...(has512 ? [el("label", { title: "also fetch the largest scheme" }, [highToggle, " high detail"])] : []),
        stageBadge,
        schemeRow,
      ]),
      status,
      el("p", { class: "muted" }, [
        glOk ? "drag to orbit" : "WebGL2 unavailable; falling back to a small software render",
      ]),
    ]);
    this.root.replaceChildren(page);

    const plannedMax = () => Math.max(...plannedSchemes(manifest, highDetail), 0);

    const renderParams = (): RenderParams => ({
      azimuthDeg: state.azimuthDeg,
      elevationDeg: state.elevationDeg,
      imageDim: glOk ? 512 : 160,
      steps: glOk ? Math.max(256, state.activeScheme) : 160,
      mode: state.mode,
      threshold: state.threshold,
      gain: 4.0,
    });

    const renderNow = () => {
      const vol = volumes.get(state.activeScheme);
      if (!alive || !vol) return;
      const params = renderParams();
      if (glOk) {
        gl.render(params);
        return;
      }
      canvas.width = params.imageDim;
      canvas.height = params.imageDim;
      const ctx = canvas.getContext("2d");
      if (!ctx) return;
      const gray = renderFrameCPU(vol, params);
      const img = ctx.createImageData(params.imageDim, params.imageDim);
      for (let i = 0; i < gray.length; i++) {
        img.data[i * 4] = img.data[i * 4 + 1] = img.data[i * 4 + 2] = gray[i];
        img.data[i * 4 + 3] = 255;
      }
      ctx.putImageData(img, 0, 0);
    };

    const syncUrl = () => {
      if (!alive) return;
      history.replaceState(
        null,
        "",
        formatRoute({ page: "view", id, query: queryFromViewState(state) }),
      );
    };

    const updateHud = () => {
      stageBadge.textContent = state.loadingStage;
      stageBadge.dataset.stage = state.loadingStage;
      schemeRow.replaceChildren(
        ...plannedSchemes(manifest, highDetail).map((s) => {
          const cls =
            s === state.activeScheme ? "chip active" : volumes.has(s) ? "chip loaded" : "chip";
          return el("span", { class: cls }, [`${s}³`]);
        }),
      );
      thrSlider.disabled = state.mode === "additive";
      modeSurface.checked = state.mode === "surface";
      modeAdditive.checked = state.mode === "additive";
    };
    updateHud();

    const schemeReady = (s: number, vol: AtlasVolume) => {
      if (!alive) return;
      volumes.set(s, vol);
      const next = applyScheme(state, s, plannedMax());
      if (!next) {
        updateHud();
        return;
      }
      state = next;
      if (glOk) gl.upload(vol);
      status.textContent =
        state.loadingStage === "done" ? "" : `showing ${s}³; fetching finer volume…`;
      updateHud();
      syncUrl();
      requestRender();
    };

    const startLoad = (withHigh: boolean) => {
      progressiveLoad(this.api, manifest, schemeReady, this.fetcher, {
        highDetail: withHigh,
        signal: abort.signal,
      }).catch((err) => {
        if (!alive || err instanceof AbortedError) return;
        status.replaceChildren(
          `Volume fetch failed: ${err} `,
          (() => {
            const retry = el("button", { type: "button" }, ["Retry"]);
            retry.addEventListener("click", () => {
              status.textContent = "retrying…";
              startLoad(highDetail);
            });
            return retry;
          })(),
        );
      });
    };

    thrSlider.addEventListener("input", () => {
      state = setThreshold(state, Number(thrSlider.value));
      thrLabel.textContent = ` ${state.threshold}`;
      syncUrl();
      requestRender();
    });
    const pickMode = (mode: ViewerState["mode"]) => {
      state = setMode(state, mode);
      updateHud();
      syncUrl();
      requestRender();
    };
    modeSurface.addEventListener("change", () => pickMode("surface"));
    modeAdditive.addEventListener("change", () => pickMode("additive"));
    highToggle.addEventListener("change", () => {
      highDetail = highToggle.checked;
      updateHud();
      if (highDetail && !volumes.has(512)) {
        status.textContent = "fetching high-detail volume…";
        loadOneScheme(this.api, manifest, 512, this.fetcher, { signal: abort.signal })
          .then((vol) => schemeReady(512, vol))
          .catch((err) => {
            if (alive && !(err instanceof AbortedError)) {
              status.textContent = `High-detail fetch failed: ${err}`;
            }
          });
      }
    });

    let drag: { x: number; y: number } | null = null;
    canvas.addEventListener("pointerdown", (ev) => {
      drag = { x: ev.clientX, y: ev.clientY };
      canvas.setPointerCapture(ev.pointerId);
    });
    canvas.addEventListener("pointermove", (ev) => {
      if (!drag) return;
      const scale = 360 / canvas.clientWidth;
      state = setOrbit(
        state,
        state.azimuthDeg + (ev.clientX - drag.x) * scale,
        state.elevationDeg + (ev.clientY - drag.y) * scale,
      );
      drag = { x: ev.clientX, y: ev.clientY };
      requestRender();
    });
    const endDrag = () => {
      if (!drag) return;
      drag = null;
      syncUrl();
    };
    canvas.addEventListener("pointerup", endDrag);
    canvas.addEventListener("pointercancel", endDrag);

    startLoad(highDetail);
  }
}

export function main(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  new App(root).start();
}
