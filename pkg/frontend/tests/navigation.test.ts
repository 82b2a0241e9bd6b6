import { describe, expect, it } from "vitest";
import {
  dataImageTarget,
  formatRoute,
  listCardTarget,
  parseHash,
  queryFromViewState,
  viewStateFromQuery,
} from "../src/router";
import { initialState } from "../src/state";
import type { DatasetManifest } from "../src/api";

describe("two-click path from the list to the interactive view", () => {
  it("reaches the interactive view in exactly two clicks", () => {
    const clicks = [listCardTarget("fixture-128"), dataImageTarget("fixture-128")];
    expect(clicks).toHaveLength(2);
    expect(parseHash(clicks[0])).toEqual({ page: "data", id: "fixture-128" });
    const second = parseHash(clicks[1]);
    expect(second.page).toBe("view");
    expect(second.page === "view" && second.id).toBe("fixture-128");
  });
});

describe("hash routes", () => {
  it("parses the three pages", () => {
    expect(parseHash("")).toEqual({ page: "list" });
    expect(parseHash("#/")).toEqual({ page: "list" });
    expect(parseHash("#/data/abc")).toEqual({ page: "data", id: "abc" });
    const v = parseHash("#/view/abc?t=140");
    expect(v.page).toBe("view");
    expect(v.page === "view" && v.query.get("t")).toBe("140");
  });

  it("falls back to the list on anything unrecognized", () => {
    expect(parseHash("#/nope").page).toBe("list");
    expect(parseHash("#/data").page).toBe("list");
    expect(parseHash("#/data/a/b").page).toBe("list");
  });

  it("round-trips ids that need escaping", () => {
    for (const id of ["plain", "with space", "a%2Fb", "ümlaut"]) {
      const r = parseHash(formatRoute({ page: "data", id }));
      expect(r).toEqual({ page: "data", id });
    }
  });
});

describe("deep-link state", () => {
  function fakeManifest(): DatasetManifest {
    return {
      id: "d1",
      name: "D 1",
      dims: [128, 128, 128],
      raw_bytes: 0,
      thumbnail_url: null,
      sidecar: null,
      data: null,
      interactive: {
        schemes: [128, 256, 512],
        container: null,
        thresholds: { "128": 19 },
        warnings: [],
        schemes_detail: {},
      },
    };
  }

  it("restores threshold, camera and mode from the query", () => {
    const q = new URLSearchParams("s=256&t=140&az=200.5&el=-30&m=additive");
    expect(viewStateFromQuery(q)).toEqual({
      activeScheme: 256,
      threshold: 140,
      azimuthDeg: 200.5,
      elevationDeg: -30,
      mode: "additive",
    });
  });

  it("ignores values outside their domains", () => {
    const q = new URLSearchParams("s=100&t=999&az=bad&el=200&m=x");
    expect(viewStateFromQuery(q)).toEqual({ elevationDeg: 89 });
  });

  it("survives a full state -> query -> state round trip", () => {
    const state = {
      ...initialState(fakeManifest()),
      activeScheme: 256,
      threshold: 140,
      azimuthDeg: 123.4,
      elevationDeg: -15,
      mode: "additive" as const,
    };
    const back = viewStateFromQuery(queryFromViewState(state));
    expect(back.activeScheme).toBe(256);
    expect(back.threshold).toBe(140);
    expect(back.azimuthDeg).toBeCloseTo(123.4, 5);
    expect(back.elevationDeg).toBeCloseTo(-15, 5);
    expect(back.mode).toBe("additive");
  });

  it("writes a hash a fresh session can open", () => {
    const state = { ...initialState(fakeManifest()), threshold: 77, azimuthDeg: 45 };
    const hash = formatRoute({ page: "view", id: "d1", query: queryFromViewState(state) });
    const route = parseHash(hash);
    expect(route.page).toBe("view");
    if (route.page === "view") {
      expect(route.id).toBe("d1");
      expect(viewStateFromQuery(route.query).threshold).toBe(77);
    }
  });
});
