// Pure SVG/HTML renderers for every view.
//
// Each function maps a server payload to a markup string and nothing else:
// no fetches, no randomness, no physics.  Every displayed number carries a
// data-value attribute holding the raw server value, which is what the
// contract tests check; the visible text is just a formatted copy.

import type {
  GeneratePayload,
  GeneratedDesign,
  GeometryPayload,
  LatentPayload,
  ParetoPayload,
  SensitivitySwarmPayload,
} from "./api.js";
import { METRIC_NAMES } from "./api.js";

const COST_COLUMN = METRIC_NAMES.indexOf("cost");

export function fmt(value: number): string {
  if (!Number.isFinite(value)) return String(value);
  const abs = Math.abs(value);
  if (abs !== 0 && (abs >= 1e5 || abs < 1e-3)) return value.toExponential(2);
  if (Number.isInteger(value)) return String(value);
  return value.toPrecision(4);
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

interface Box {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
}

function boxOf(points: Iterable<readonly [number, number]>): Box {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x);
    maxX = Math.max(maxX, x);
    minY = Math.min(minY, y);
    maxY = Math.max(maxY, y);
  }
  return { minX, maxX, minY, maxY };
}

function pad(box: Box, fraction: number): Box {
  const dx = Math.max(1e-9, (box.maxX - box.minX) * fraction);
  const dy = Math.max(1e-9, (box.maxY - box.minY) * fraction);
  return { minX: box.minX - dx, maxX: box.maxX + dx, minY: box.minY - dy, maxY: box.maxY + dy };
}

// world -> pixel mapping with the y axis flipped for screen coordinates
function mapper(box: Box, width: number, height: number) {
  const sx = width / (box.maxX - box.minX || 1);
  const sy = height / (box.maxY - box.minY || 1);
  return {
    x: (v: number) => (v - box.minX) * sx,
    y: (v: number) => height - (v - box.minY) * sy,
  };
}

function polyline(points: readonly (readonly [number, number])[], map: ReturnType<typeof mapper>, cls: string): string {
  const path = points.map(([x, y]) => `${map.x(x).toFixed(2)},${map.y(y).toFixed(2)}`).join(" ");
  return `<polyline class="${cls}" fill="none" points="${path}"/>`;
}

// blue (cheap) to red (expensive)
export function costColor(value: number, min: number, max: number): string {
  const t = max > min ? Math.min(1, Math.max(0, (value - min) / (max - min))) : 0.5;
  const r = Math.round(40 + 200 * t);
  const b = Math.round(220 - 180 * t);
  return `rgb(${r},80,${b})`;
}

export function renderPlan(geometry: GeometryPayload, width = 260, height = 72): string {
  const box = pad(boxOf(geometry.plan), 0.08);
  const map = mapper(box, width, height);
  return (
    `<svg class="plan" viewBox="0 0 ${width} ${height}" data-points="${geometry.plan.length}">` +
    polyline(geometry.plan, map, "axisline") +
    `</svg>`
  );
}

export function renderElevation(geometry: GeometryPayload, width = 260, height = 84): string {
  const elev = geometry.elevation;
  const all = [...elev.deck_top, ...elev.deck_bottom, ...elev.ground];
  const box = pad(boxOf(all), 0.08);
  const map = mapper(box, width, height);
  const pierRects = elev.piers
    .map((p) => {
      const x0 = map.x(p.station - p.side / 2);
      const x1 = map.x(p.station + p.side / 2);
      const yTop = map.y(p.top);
      const yBottom = map.y(p.bottom);
      return (
        `<rect class="pier" x="${x0.toFixed(2)}" y="${yTop.toFixed(2)}" ` +
        `width="${(x1 - x0).toFixed(2)}" height="${(yBottom - yTop).toFixed(2)}" ` +
        `data-station="${p.station}" data-side="${p.side}"/>`
      );
    })
    .join("");
  const deck =
    `<polygon class="deck" points="` +
    [...elev.deck_top, ...[...elev.deck_bottom].reverse()]
      .map(([x, y]) => `${map.x(x).toFixed(2)},${map.y(y).toFixed(2)}`)
      .join(" ") +
    `"/>`;
  return (
    `<svg class="elevation" viewBox="0 0 ${width} ${height}" data-piers="${elev.piers.length}">` +
    polyline(elev.ground, map, "ground") +
    pierRects +
    deck +
    `</svg>`
  );
}

// gallery order: most reliable first (smallest mean gap), cheaper wins ties
export function sortDesigns(designs: readonly GeneratedDesign[]): GeneratedDesign[] {
  return [...designs].sort((a, b) => {
    if (a.mean_reliability !== b.mean_reliability) return a.mean_reliability - b.mean_reliability;
    return a.y_pred.cost - b.y_pred.cost;
  });
}

export function renderCard(design: GeneratedDesign, rank: number): string {
  const features = Object.entries(design.x)
    .map(
      ([name, value]) =>
        `<div class="kv"><span>${esc(name)}</span><b data-feature="${esc(name)}" data-value="${value}">${fmt(value)}</b></div>`,
    )
    .join("");
  const reliability = Object.entries(design.reliability)
    .map(
      ([name, value]) =>
        `<span class="chip" data-metric="${esc(name)}" data-value="${value}" title="${esc(name)}: gap ${fmt(value)}">${esc(name)} ${fmt(value)}</span>`,
    )
    .join("");
  const badges =
    (design.clipped ? `<span class="badge warn">clipped</span>` : "") +
    (design.y_pred.clearance_ok ? "" : `<span class="badge">clearance!</span>`) +
    (design.y_pred.trees_ok ? "" : `<span class="badge">trees!</span>`);
  return (
    `<article class="card" data-rank="${rank}" data-mean-reliability="${design.mean_reliability}" data-cost="${design.y_pred.cost}">` +
    `<header>#${rank + 1} <b data-value="${design.y_pred.cost}">${fmt(design.y_pred.cost)}</b> CHF` +
    `<span class="aggregate" data-value="${design.mean_reliability}">mean gap ${fmt(design.mean_reliability)}</span>${badges}</header>` +
    renderPlan(design.geometry) +
    renderElevation(design.geometry) +
    `<div class="features">${features}</div>` +
    `<div class="chips">${reliability}</div>` +
    `</article>`
  );
}

export function renderGallery(payload: GeneratePayload): string {
  if (payload.designs.length === 0) return emptyState("no designs in this batch");
  const warning = payload.warning
    ? `<div class="warning" role="alert">${esc(payload.warning)}</div>`
    : "";
  const cards = sortDesigns(payload.designs)
    .map((design, rank) => renderCard(design, rank))
    .join("");
  return `${warning}<div class="gallery" data-seed="${payload.seed}" data-n="${payload.n}">${cards}</div>`;
}

export function renderBars(variables: readonly string[], values: readonly number[], title: string): string {
  if (variables.length === 0) return emptyState("no sensitivities");
  const limit = Math.max(...values.map(Math.abs), 1e-12);
  const rows = variables
    .map((name, j) => {
      const v = values[j] ?? 0;
      const half = 120;
      const len = (Math.abs(v) / limit) * half;
      const x = v < 0 ? half - len : half;
      const y = 8 + j * 26;
      return (
        `<text x="0" y="${y + 12}" class="label">${esc(name)}</text>` +
        `<rect class="bar ${v < 0 ? "neg" : "pos"}" x="${(x + 70).toFixed(2)}" y="${y}" ` +
        `width="${Math.max(0.5, len).toFixed(2)}" height="16" data-variable="${esc(name)}" data-value="${v}"/>` +
        `<text x="${half * 2 + 80}" y="${y + 12}" class="value" data-value="${v}">${fmt(v)}</text>`
      );
    })
    .join("");
  const height = 16 + variables.length * 26;
  return (
    `<figure class="bars"><figcaption>${esc(title)}</figcaption>` +
    `<svg viewBox="0 0 340 ${height}"><line class="axisline" x1="190" y1="0" x2="190" y2="${height}"/>${rows}</svg></figure>`
  );
}

export function renderSwarm(payload: SensitivitySwarmPayload): string {
  if (payload.values_std.length === 0) return emptyState("no swarm data");
  const flat = payload.values_std.flat();
  const box = { minX: 0, maxX: 1, minY: Math.min(...flat, 0), maxY: Math.max(...flat, 0) };
  const width = 460;
  const height = 220;
  const map = mapper(pad(box, 0.08), width, height);
  const costMin = Math.min(...payload.cost);
  const costMax = Math.max(...payload.cost);
  const columns = payload.variables.length;
  const dots = payload.values_std
    .map((row, i) =>
      row
        .map((value, j) => {
          // deterministic horizontal spread inside the column
          const offset = ((i % 9) - 4) / 60;
          const cx = (j + 0.5) / columns + offset;
          const cost = payload.cost[i] ?? 0;
          return (
            `<circle class="dot" cx="${map.x(cx).toFixed(2)}" cy="${map.y(value).toFixed(2)}" r="3" ` +
            `fill="${costColor(cost, costMin, costMax)}" data-design="${i}" ` +
            `data-variable="${esc(payload.variables[j] ?? "")}" data-value="${value}" data-cost="${cost}">` +
            `<title>design ${i}: ${fmt(value)}</title></circle>`
          );
        })
        .join(""),
    )
    .join("");
  const labels = payload.variables
    .map((name, j) => `<text class="label" x="${map.x((j + 0.5) / columns).toFixed(2)}" y="${height - 4}">${esc(name)}</text>`)
    .join("");
  const zero = `<line class="axisline" x1="0" y1="${map.y(0).toFixed(2)}" x2="${width}" y2="${map.y(0).toFixed(2)}"/>`;
  return `<svg class="swarm" viewBox="0 0 ${width} ${height}" data-designs="${payload.values_std.length}">${zero}${dots}${labels}</svg>`;
}

export function renderPareto(payload: ParetoPayload): string {
  if (payload.points.length === 0) return emptyState("no points for this source");
  const width = 460;
  const height = 300;
  const map = mapper(pad(boxOf(payload.points), 0.06), width, height);
  const front = new Set(payload.front_indices);
  const frontPoints = payload.front_indices
    .map((i) => payload.points[i])
    .filter((p): p is [number, number] => p !== undefined)
    .sort((a, b) => a[0] - b[0]);
  const frontLine =
    frontPoints.length > 1
      ? `<polyline class="frontline" fill="none" points="${frontPoints
          .map(([x, y]) => `${map.x(x).toFixed(2)},${map.y(y).toFixed(2)}`)
          .join(" ")}"/>`
      : "";
  const dots = payload.points
    .map(([cost, uls], i) => {
      const cls = front.has(i) ? "dot front" : "dot";
      return (
        `<circle class="${cls}" cx="${map.x(cost).toFixed(2)}" cy="${map.y(uls).toFixed(2)}" ` +
        `r="${front.has(i) ? 4.5 : 2.5}" data-index="${i}" data-cost="${cost}" data-uls="${uls}">` +
        `<title>#${i}: ${fmt(cost)} CHF, uls ${fmt(uls)}</title></circle>`
      );
    })
    .join("");
  return (
    `<svg class="pareto" viewBox="0 0 ${width} ${height}" data-source="${esc(payload.source)}" ` +
    `data-front-size="${payload.front_indices.length}">${frontLine}${dots}` +
    `<text class="label" x="${width / 2}" y="${height - 4}">cost</text>` +
    `<text class="label vertical" x="10" y="${height / 2}">uls_util</text></svg>`
  );
}

export function renderLatent(payload: LatentPayload): string {
  if (payload.z.length === 0) return emptyState("no latent points");
  const width = 460;
  const height = 360;
  const pts = payload.z.map((row) => [row[0] ?? 0, row[1] ?? 0] as [number, number]);
  const map = mapper(pad(boxOf(pts), 0.06), width, height);
  const costs = payload.y.map((row) => row[COST_COLUMN] ?? 0);
  const costMin = Math.min(...costs);
  const costMax = Math.max(...costs);
  const dots = pts
    .map(([z0, z1], i) => {
      const cost = costs[i] ?? 0;
      return (
        `<circle class="dot" cx="${map.x(z0).toFixed(2)}" cy="${map.y(z1).toFixed(2)}" r="2.5" ` +
        `fill="${costColor(cost, costMin, costMax)}" data-index="${i}" data-z0="${z0}" data-z1="${z1}" data-cost="${cost}">` +
        `<title>cost ${fmt(cost)}</title></circle>`
      );
    })
    .join("");
  return (
    `<svg class="latent" viewBox="0 0 ${width} ${height}" data-points="${payload.z.length}" data-dims="2">${dots}` +
    `<text class="label" x="${width / 2}" y="${height - 4}">z0</text>` +
    `<text class="label vertical" x="10" y="${height / 2}">z1</text></svg>`
  );
}

export function emptyState(message: string): string {
  return `<div class="empty">${esc(message)}</div>`;
}
