// DOM glue: panel wiring, request flows, view switching.
//
// All rendering goes through render.ts string builders; all traffic goes
// through one ApiClient.  The panel state round-trips localStorage so
// reloading the page replays the last session deterministically.

import { ApiClient, ApiError, LatestTracker } from "./api.js";
import type { DesignVector, GeneratePayload, MetaPayload, MetricName } from "./api.js";
import {
  buildGenerateBody,
  clampState,
  defaultState,
  limitsFromMeta,
  restore,
  serialize,
  type PanelLimits,
  type PanelState,
} from "./state.js";
import {
  emptyState,
  fmt,
  renderBars,
  renderCard,
  renderGallery,
  renderLatent,
  renderPareto,
  renderSwarm,
  sortDesigns,
} from "./render.js";

const STORAGE_KEY = "footbridge-panel";

const client = new ApiClient();
const galleryTracker = new LatestTracker();
const detailTracker = new LatestTracker();
const viewTracker = new LatestTracker();

let limits: PanelLimits;
let state: PanelState;
let lastGenerate: GeneratePayload | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(err: unknown): void {
  const banner = el<HTMLDivElement>("error");
  banner.textContent = err instanceof ApiError ? err.detail : String(err);
  banner.hidden = false;
}

function clearError(): void {
  el<HTMLDivElement>("error").hidden = true;
}

interface SliderSpec {
  key: "cost" | "costBand" | "maxUls" | "maxSls" | "f1";
  label: string;
  metric: MetricName | null;
}

const SLIDERS: SliderSpec[] = [
  { key: "cost", label: "cost target (CHF)", metric: "cost" },
  { key: "costBand", label: "acceptable band (+- CHF)", metric: null },
  { key: "maxUls", label: "max uls_util", metric: "uls_util" },
  { key: "maxSls", label: "max sls_util", metric: "sls_util" },
  { key: "f1", label: "f1 target (Hz)", metric: "f1" },
];

function buildPanel(): void {
  const host = el<HTMLDivElement>("sliders");
  host.innerHTML = "";
  for (const slider of SLIDERS) {
    const lo = slider.metric ? limits.metricMin[slider.metric] : 0;
    const hi = slider.metric ? limits.metricMax[slider.metric] : limits.metricMax.cost;
    const row = document.createElement("label");
    row.className = "slider-row";
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(lo);
    input.max = String(hi);
    input.step = String((hi - lo) / 500 || 1);
    input.value = String(state[slider.key]);
    const value = document.createElement("output");
    value.textContent = fmt(state[slider.key]);
    input.addEventListener("input", () => {
      state = clampState({ ...state, [slider.key]: Number(input.value) }, limits);
      value.textContent = fmt(state[slider.key]);
    });
    const caption = document.createElement("span");
    caption.textContent = slider.label;
    row.append(caption, input, value);
    host.append(row);
  }

  const clearance = el<HTMLInputElement>("clearance");
  const trees = el<HTMLInputElement>("trees");
  clearance.checked = state.clearanceRequired;
  trees.checked = state.treesRequired;
  clearance.addEventListener("change", () => (state = { ...state, clearanceRequired: clearance.checked }));
  trees.addEventListener("change", () => (state = { ...state, treesRequired: trees.checked }));

  const n = el<HTMLInputElement>("batch-n");
  const seed = el<HTMLInputElement>("batch-seed");
  n.value = String(state.n);
  seed.value = String(state.seed);
  n.addEventListener("change", () => {
    state = clampState({ ...state, n: Number(n.value) }, limits);
    n.value = String(state.n);
  });
  seed.addEventListener("change", () => {
    state = clampState({ ...state, seed: Number(seed.value) }, limits);
    seed.value = String(state.seed);
  });
}

function withinBand(payload: GeneratePayload): GeneratePayload {
  if (state.costBand <= 0) return payload;
  const kept = payload.designs.filter((d) => Math.abs(d.y_pred.cost - state.cost) <= state.costBand);
  return kept.length === 0 ? payload : { ...payload, designs: kept };
}

async function runGenerate(): Promise<void> {
  clearError();
  const token = galleryTracker.begin();
  el<HTMLDivElement>("gallery-host").innerHTML = emptyState("generating...");
  try {
    localStorage.setItem(STORAGE_KEY, serialize(state));
    const payload = await client.generate(buildGenerateBody(state));
    if (!galleryTracker.isCurrent(token)) return;
    lastGenerate = payload;
    el<HTMLDivElement>("gallery-host").innerHTML = renderGallery(withinBand(payload));
    wireCards();
  } catch (err) {
    if (galleryTracker.isCurrent(token)) showError(err);
  }
}

function wireCards(): void {
  document.querySelectorAll<HTMLElement>("#gallery-host .card").forEach((card) => {
    card.addEventListener("click", () => {
      if (!lastGenerate) return;
      const rank = Number(card.dataset.rank ?? -1);
      const ordered = sortDesigns(lastGenerate.designs);
      const design = ordered[rank];
      if (design) void showDesignDetail(design.x);
    });
  });
}

async function showDesignDetail(x: DesignVector): Promise<void> {
  const token = detailTracker.begin();
  const host = el<HTMLDivElement>("detail-host");
  host.innerHTML = emptyState("loading sensitivities...");
  try {
    const report = await client.sensitivitySingle(x);
    if (!detailTracker.isCurrent(token)) return;
    const costRow = report.targets.indexOf("cost");
    const values = report.per_variable_physical[costRow] ?? [];
    host.innerHTML = renderBars(report.variables, values, "d cost / d variable (CHF per unit)");
  } catch (err) {
    if (detailTracker.isCurrent(token)) showError(err);
  }
}

async function showView(name: string): Promise<void> {
  clearError();
  document.querySelectorAll<HTMLButtonElement>("nav button").forEach((b) => {
    b.classList.toggle("active", b.dataset.view === name);
  });
  const host = el<HTMLDivElement>("view-host");
  const token = viewTracker.begin();
  host.innerHTML = emptyState("loading...");
  try {
    let markup: string;
    if (name === "swarm") {
      const payload = await client.sensitivitySwarm(buildGenerateBody(state));
      markup = renderSwarm(payload);
    } else if (name === "pareto-dataset") {
      markup = renderPareto(await client.pareto({ source: "dataset" }));
    } else if (name === "pareto-generated") {
      const body = buildGenerateBody(state);
      const csv = [
        body.y_request.uls_util,
        body.y_request.sls_util,
        body.y_request.f1,
        body.y_request.cost,
        body.y_request.clearance_ok,
        body.y_request.trees_ok,
      ].join(",");
      markup = renderPareto(await client.pareto({ source: "generated", n: state.n, seed: state.seed, y_request: csv }));
    } else if (name === "latent") {
      markup = renderLatent(await client.latent());
    } else {
      markup = emptyState("unknown view");
    }
    if (!viewTracker.isCurrent(token)) return;
    host.innerHTML = markup;
    wireParetoClicks(name);
  } catch (err) {
    if (viewTracker.isCurrent(token)) showError(err);
  }
}

// a generated-front point maps back to a design card through the same
// seeded batch; dataset points only carry their two coordinates
function wireParetoClicks(view: string): void {
  if (view !== "pareto-generated") return;
  document.querySelectorAll<SVGCircleElement>("#view-host .pareto .dot").forEach((dot) => {
    dot.addEventListener("click", () => {
      void (async () => {
        const index = Number(dot.dataset.index ?? -1);
        const payload = lastGenerate ?? (await client.generate(buildGenerateBody(state)));
        const design = payload.designs[index];
        if (design) {
          el<HTMLDivElement>("detail-host").innerHTML = renderCard(design, index);
        }
      })();
    });
  });
}

async function boot(): Promise<void> {
  let meta: MetaPayload;
  try {
    meta = await client.getMeta();
  } catch (err) {
    showError(err);
    return;
  }
  if (!meta.checkpoint_hash) {
    showError(new ApiError(503, "no model checkpoint loaded; start the service with --ckpt"));
    return;
  }
  limits = limitsFromMeta(meta);
  const saved = localStorage.getItem(STORAGE_KEY);
  state = saved ? restore(saved, limits) : defaultState(limits);
  el<HTMLSpanElement>("checkpoint").textContent = meta.checkpoint_hash.slice(0, 12);
  buildPanel();

  el<HTMLButtonElement>("generate").addEventListener("click", () => void runGenerate());
  document.querySelectorAll<HTMLButtonElement>("nav button").forEach((button) => {
    button.addEventListener("click", () => void showView(button.dataset.view ?? ""));
  });
}

void boot();
