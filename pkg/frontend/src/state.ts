// Request panel state: what the designer asked for, nothing else.
//
// The panel owns a cost target with an acceptable band, utilization caps,
// a frequency target, the two compliance checkboxes, and the batch
// controls.  Slider limits come from /api/meta; the panel never invents a
// range.  serialize/restore round-trips the whole panel so a saved session
// replays to identical request bodies.

import type { MetaPayload, MetricName, RequestVector } from "./api.js";
import { METRIC_NAMES } from "./api.js";

export interface PanelLimits {
  metricMin: Record<MetricName, number>;
  metricMax: Record<MetricName, number>;
  maxGenerate: number;
}

export interface PanelState {
  cost: number;
  costBand: number; // +- CHF around the target, gallery filter only
  maxUls: number;
  maxSls: number;
  f1: number;
  clearanceRequired: boolean;
  treesRequired: boolean;
  n: number;
  seed: number;
}

const clamp = (v: number, lo: number, hi: number) => Math.min(hi, Math.max(lo, v));

export function limitsFromMeta(meta: MetaPayload): PanelLimits {
  const metricMin = {} as Record<MetricName, number>;
  const metricMax = {} as Record<MetricName, number>;
  METRIC_NAMES.forEach((name, j) => {
    metricMin[name] = meta.y_range ? (meta.y_range.min[j] ?? 0) : 0;
    metricMax[name] = meta.y_range ? (meta.y_range.max[j] ?? 1) : 1;
  });
  return { metricMin, metricMax, maxGenerate: meta.max_generate };
}

export function defaultState(limits: PanelLimits): PanelState {
  const mid = (name: MetricName) => (limits.metricMin[name] + limits.metricMax[name]) / 2;
  return {
    cost: mid("cost"),
    costBand: (limits.metricMax.cost - limits.metricMin.cost) / 4,
    maxUls: mid("uls_util"),
    maxSls: mid("sls_util"),
    f1: mid("f1"),
    clearanceRequired: false,
    treesRequired: false,
    n: 100,
    seed: 0,
  };
}

// pull every control into the ranges the server reported
export function clampState(state: PanelState, limits: PanelLimits): PanelState {
  return {
    ...state,
    cost: clamp(state.cost, limits.metricMin.cost, limits.metricMax.cost),
    costBand: Math.max(0, state.costBand),
    maxUls: clamp(state.maxUls, limits.metricMin.uls_util, limits.metricMax.uls_util),
    maxSls: clamp(state.maxSls, limits.metricMin.sls_util, limits.metricMax.sls_util),
    f1: clamp(state.f1, limits.metricMin.f1, limits.metricMax.f1),
    n: clamp(Math.round(state.n), 1, limits.maxGenerate),
    seed: Math.round(state.seed),
  };
}

export function toRequestVector(state: PanelState): RequestVector {
  return {
    uls_util: state.maxUls,
    sls_util: state.maxSls,
    f1: state.f1,
    cost: state.cost,
    clearance_ok: state.clearanceRequired ? 1 : 0,
    trees_ok: state.treesRequired ? 1 : 0,
  };
}

export function buildGenerateBody(state: PanelState): { y_request: RequestVector; n: number; seed: number } {
  return { y_request: toRequestVector(state), n: state.n, seed: state.seed };
}

export function serialize(state: PanelState): string {
  return JSON.stringify(state);
}

export function restore(text: string, limits: PanelLimits): PanelState {
  const raw = JSON.parse(text) as Partial<PanelState>;
  const base = defaultState(limits);
  const merged: PanelState = {
    cost: numberOr(raw.cost, base.cost),
    costBand: numberOr(raw.costBand, base.costBand),
    maxUls: numberOr(raw.maxUls, base.maxUls),
    maxSls: numberOr(raw.maxSls, base.maxSls),
    f1: numberOr(raw.f1, base.f1),
    clearanceRequired: raw.clearanceRequired === true,
    treesRequired: raw.treesRequired === true,
    n: numberOr(raw.n, base.n),
    seed: numberOr(raw.seed, base.seed),
  };
  return clampState(merged, limits);
}

function numberOr(value: unknown, fallback: number): number {
  return typeof value === "number" && Number.isFinite(value) ? value : fallback;
}
