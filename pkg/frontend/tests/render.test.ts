// Rendering contract against recorded service responses: every number in
// the markup is a server value, the gallery order follows reliability with
// a cost tie-break, the Pareto view marks exactly the server's index set,
// and rendering is deterministic so a seed replay reproduces the view.

import { describe, expect, it } from "vitest";

import type {
  GeneratePayload,
  LatentPayload,
  ParetoPayload,
  SensitivitySinglePayload,
  SensitivitySwarmPayload,
} from "../src/api.js";
import {
  renderBars,
  renderCard,
  renderElevation,
  renderGallery,
  renderLatent,
  renderPareto,
  renderPlan,
  renderSwarm,
  sortDesigns,
} from "../src/render.js";
import { fixture } from "./fixtures.js";

const generated = fixture<GeneratePayload>("generate");
const extrapolated = fixture<GeneratePayload>("generate_extrapolated");
const single = fixture<SensitivitySinglePayload>("sensitivity_single");
const swarm = fixture<SensitivitySwarmPayload>("sensitivity_swarm");
const latent = fixture<LatentPayload>("latent");
const paretoDataset = fixture<ParetoPayload>("pareto_dataset");
const paretoGenerated = fixture<ParetoPayload>("pareto_generated");

function dataValues(markup: string, attribute = "data-value"): string[] {
  const pattern = new RegExp(`${attribute}="([^"]*)"`, "g");
  return [...markup.matchAll(pattern)].map((m) => m[1] ?? "");
}

describe("gallery", () => {
  it("sorts by mean reliability with a cost tie-break", () => {
    const ordered = sortDesigns(generated.designs);
    for (let k = 1; k < ordered.length; k++) {
      expect(ordered[k]!.mean_reliability).toBeGreaterThanOrEqual(ordered[k - 1]!.mean_reliability);
    }
    const tied = sortDesigns([
      { ...generated.designs[0]!, mean_reliability: 1.0, y_pred: { ...generated.designs[0]!.y_pred, cost: 900 } },
      { ...generated.designs[1]!, mean_reliability: 1.0, y_pred: { ...generated.designs[1]!.y_pred, cost: 100 } },
    ]);
    expect(tied[0]!.y_pred.cost).toBe(100);
    expect(tied[1]!.y_pred.cost).toBe(900);
  });

  it("renders one card per design in sorted rank order", () => {
    const markup = renderGallery(generated);
    const ranks = dataValues(markup, "data-rank").map(Number);
    expect(ranks).toEqual([...Array(generated.designs.length).keys()]);
    const means = dataValues(markup, "data-mean-reliability").map(Number);
    expect(means).toEqual(sortDesigns(generated.designs).map((d) => d.mean_reliability));
  });

  it("card numbers are exactly the server's numbers", () => {
    const design = generated.designs[0]!;
    const markup = renderCard(design, 0);
    for (const [name, value] of Object.entries(design.x)) {
      expect(markup).toContain(`data-feature="${name}" data-value="${value}"`);
    }
    for (const [name, value] of Object.entries(design.reliability)) {
      expect(markup).toContain(`data-metric="${name}" data-value="${value}"`);
    }
    expect(markup).toContain(`data-cost="${design.y_pred.cost}"`);
  });

  it("geometry is rendered verbatim from the payload", () => {
    const design = generated.designs[0]!;
    const plan = renderPlan(design.geometry);
    expect(plan).toContain(`data-points="${design.geometry.plan.length}"`);
    const elevation = renderElevation(design.geometry);
    expect(elevation).toContain(`data-piers="${design.geometry.elevation.piers.length}"`);
    for (const pier of design.geometry.elevation.piers) {
      expect(elevation).toContain(`data-station="${pier.station}"`);
    }
    expect(design.geometry.elevation.piers.length).toBe(design.x.n_p);
  });

  it("shows the server's extrapolation warning inline", () => {
    const markup = renderGallery(extrapolated);
    expect(extrapolated.warning).toBeTruthy();
    expect(markup).toContain(extrapolated.warning!);
    expect(renderGallery(generated)).not.toContain("warning");
  });

  it("replays identically for the same payload", () => {
    expect(renderGallery(generated)).toBe(renderGallery(generated));
  });

  it("empty batch renders an explicit empty state", () => {
    expect(renderGallery({ ...generated, designs: [] })).toContain("no designs in this batch");
  });
});

describe("sensitivity views", () => {
  it("bar chart carries one bar per variable with the server value", () => {
    const costRow = single.targets.indexOf("cost");
    const values = single.per_variable_physical[costRow]!;
    const markup = renderBars(single.variables, values, "cost sensitivities");
    const bars = dataValues(markup, "data-variable");
    expect(bars).toEqual(single.variables);
    const shown = [...markup.matchAll(/<rect[^>]*data-value="([^"]*)"/g)].map((m) => Number(m[1]));
    expect(shown).toEqual(values);
  });

  it("swarm plots every design/variable pair from the payload", () => {
    const markup = renderSwarm(swarm);
    const shown = [...markup.matchAll(/<circle[^>]*data-value="([^"]*)"/g)].map((m) => m[1]);
    expect(shown).toHaveLength(swarm.values_std.length * swarm.variables.length);
    expect(shown).toEqual(swarm.values_std.flat().map(String));
    const costs = new Set(dataValues(markup, "data-cost").map(Number));
    for (const c of swarm.cost) expect(costs.has(c)).toBe(true);
  });

  it("swarm is deterministic", () => {
    expect(renderSwarm(swarm)).toBe(renderSwarm(swarm));
  });
});

describe("pareto", () => {
  it("marks exactly the server's front index set", () => {
    for (const payload of [paretoDataset, paretoGenerated]) {
      const markup = renderPareto(payload);
      const front = [...markup.matchAll(/class="dot front"[^>]*data-index="(\d+)"/g)].map((m) => Number(m[1]));
      expect([...front].sort((a, b) => a - b)).toEqual([...payload.front_indices].sort((a, b) => a - b));
      const total = [...markup.matchAll(/<circle/g)].length;
      expect(total).toBe(payload.points.length);
    }
  });

  it("every plotted coordinate is a server point", () => {
    const markup = renderPareto(paretoGenerated);
    const costs = dataValues(markup, "data-cost").map(Number);
    const uls = dataValues(markup, "data-uls").map(Number);
    expect(costs).toEqual(paretoGenerated.points.map((p) => p[0]));
    expect(uls).toEqual(paretoGenerated.points.map((p) => p[1]));
  });

  it("empty point set renders an explicit empty state", () => {
    expect(renderPareto({ ...paretoGenerated, points: [], front_indices: [] })).toContain(
      "no points for this source",
    );
  });
});

describe("latent map", () => {
  it("plots both latent dimensions for every test point", () => {
    const markup = renderLatent(latent);
    expect(markup).toContain(`data-points="${latent.z.length}"`);
    expect(markup).toContain('data-dims="2"');
    const z0 = dataValues(markup, "data-z0").map(Number);
    expect(z0).toEqual(latent.z.map((row) => row[0]!));
  });

  it("colors come from the cost column of the server's metrics", () => {
    const markup = renderLatent(latent);
    const costs = dataValues(markup, "data-cost").map(Number);
    expect(costs).toEqual(latent.y.map((row) => row[3]!));
  });

  it("replays identically", () => {
    expect(renderLatent(latent)).toBe(renderLatent(latent));
  });
});
