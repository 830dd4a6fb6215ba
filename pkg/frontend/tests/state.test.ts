// The request panel must emit exactly the JSON bodies the service expects,
// clamp every control to the server-reported ranges, and replay a saved
// session to an identical body.

import { describe, expect, it } from "vitest";

import { canonicalJson, type GeneratePayload, type MetaPayload } from "../src/api.js";
import {
  buildGenerateBody,
  clampState,
  defaultState,
  limitsFromMeta,
  restore,
  serialize,
  type PanelState,
} from "../src/state.js";
import { fixture } from "./fixtures.js";

const meta = fixture<MetaPayload>("meta");
const generated = fixture<GeneratePayload>("generate");
const limits = limitsFromMeta(meta);

// panel positions that reproduce the recorded generate request
function panelForFixture(): PanelState {
  return {
    ...defaultState(limits),
    cost: generated.y_request.cost,
    maxUls: generated.y_request.uls_util,
    maxSls: generated.y_request.sls_util,
    f1: generated.y_request.f1,
    clearanceRequired: generated.y_request.clearance_ok === 1,
    treesRequired: generated.y_request.trees_ok === 1,
    n: generated.n,
    seed: generated.seed,
  };
}

describe("request body construction", () => {
  it("reproduces the recorded generate body exactly", () => {
    const body = buildGenerateBody(panelForFixture());
    const expected = { y_request: generated.y_request, n: generated.n, seed: generated.seed };
    expect(canonicalJson(body)).toBe(canonicalJson(expected));
  });

  it("requires six metrics in the request vector", () => {
    const body = buildGenerateBody(defaultState(limits));
    expect(Object.keys(body.y_request).sort()).toEqual(
      ["clearance_ok", "cost", "f1", "sls_util", "trees_ok", "uls_util"],
    );
  });

  it("flag checkbox flips the request field between 0 and 1", () => {
    const off = buildGenerateBody({ ...panelForFixture(), clearanceRequired: false });
    const on = buildGenerateBody({ ...panelForFixture(), clearanceRequired: true });
    expect(off.y_request.clearance_ok).toBe(0);
    expect(on.y_request.clearance_ok).toBe(1);
    expect(off.y_request.trees_ok).toBe(on.y_request.trees_ok);
  });
});

describe("clamping to server limits", () => {
  it("pulls sliders into the reported performance ranges", () => {
    const wild = clampState(
      { ...defaultState(limits), cost: 1e12, maxUls: -5, f1: 1e9 },
      limits,
    );
    expect(wild.cost).toBe(limits.metricMax.cost);
    expect(wild.maxUls).toBe(limits.metricMin.uls_util);
    expect(wild.f1).toBe(limits.metricMax.f1);
  });

  it("caps the batch size at the server limit", () => {
    const big = clampState({ ...defaultState(limits), n: 999999 }, limits);
    expect(big.n).toBe(meta.max_generate);
    const tiny = clampState({ ...defaultState(limits), n: 0 }, limits);
    expect(tiny.n).toBe(1);
  });

  it("default state already sits inside the limits", () => {
    const state = defaultState(limits);
    expect(canonicalJson(clampState(state, limits))).toBe(canonicalJson(state));
  });
});

describe("session replay", () => {
  it("serialize/restore reproduces the identical request body", () => {
    const state = panelForFixture();
    const revived = restore(serialize(state), limits);
    expect(canonicalJson(buildGenerateBody(revived))).toBe(canonicalJson(buildGenerateBody(state)));
  });

  it("restore survives junk and falls back to defaults", () => {
    const revived = restore('{"cost": "not a number", "clearanceRequired": "yes"}', limits);
    expect(revived.cost).toBe(defaultState(limits).cost);
    expect(revived.clearanceRequired).toBe(false);
  });
});
