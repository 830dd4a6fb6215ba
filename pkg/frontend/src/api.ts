// Typed client for the design service JSON API.
//
// Every view in the UI renders numbers that arrive through this file; the
// client does no numerical work of its own.  Concurrent identical requests
// are deduplicated by (endpoint, canonical body); out-of-order responses
// are discarded with LatestTracker sequence tokens.

export const FEATURE_NAMES = ["h_girder", "t_girder", "n_p", "h_p", "i", "w"] as const;
export const METRIC_NAMES = ["uls_util", "sls_util", "f1", "cost", "clearance_ok", "trees_ok"] as const;

export type FeatureName = (typeof FEATURE_NAMES)[number];
export type MetricName = (typeof METRIC_NAMES)[number];

export type DesignVector = Record<FeatureName, number>;
export type RequestVector = Record<MetricName, number>;

export interface PredictedMetrics {
  uls_util: number;
  sls_util: number;
  f1: number;
  cost: number;
  clearance_ok: boolean;
  trees_ok: boolean;
}

export interface MetaPayload {
  feature_names: string[];
  metric_names: string[];
  bounds: { lower: number[]; upper: number[] };
  max_generate: number;
  checkpoint_hash: string | null;
  y_range?: { min: number[]; max: number[] };
  model?: { widths: number[]; latent_dim: number };
}

export interface PredictPayload {
  x: DesignVector;
  y_pred: PredictedMetrics;
  flag_probabilities: { clearance_ok: number; trees_ok: number };
  checkpoint_hash: string;
}

export type PlanPoint = [number, number];

export interface PierOutline {
  station: number;
  top: number;
  bottom: number;
  side: number;
}

export interface GeometryPayload {
  plan: PlanPoint[];
  deck_width: number;
  arc_length: number;
  elevation: {
    deck_top: PlanPoint[];
    deck_bottom: PlanPoint[];
    ground: PlanPoint[];
    piers: PierOutline[];
  };
}

export interface GeneratedDesign {
  x: DesignVector;
  y_pred: PredictedMetrics;
  reliability: Record<MetricName, number>;
  mean_reliability: number;
  z: number[];
  clipped: boolean;
  geometry: GeometryPayload;
}

export interface GeneratePayload {
  y_request: RequestVector;
  n: number;
  seed: number;
  designs: GeneratedDesign[];
  extrapolated: boolean;
  warning?: string;
  checkpoint_hash: string;
}

export interface SensitivitySinglePayload {
  x: DesignVector;
  variables: string[];
  targets: string[];
  per_variable_physical: number[][];
  per_variable_std: number[][];
  jacobian_std: number[][];
  checkpoint_hash: string;
}

export interface SensitivitySwarmPayload {
  y_request: number[];
  seed: number;
  variables: string[];
  values_std: number[][];
  values_physical: number[][];
  cost: number[];
  designs: number[][];
  extrapolated: boolean;
  checkpoint_hash: string;
}

export interface LatentPayload {
  z: number[][];
  y: number[][];
  corr_cost: number[];
  mean_abs_corr_continuous: number;
  checkpoint_hash: string;
}

export interface ParetoPayload {
  source: string;
  points: PlanPoint[];
  front_indices: number[];
  directions: string[];
  checkpoint_hash: string;
}

// JSON.stringify with recursively sorted object keys, so a body hashes the
// same regardless of property insertion order.
export function canonicalJson(value: unknown): string {
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .filter(([, v]) => v !== undefined)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => JSON.stringify(k) + ":" + canonicalJson(v));
    return "{" + entries.join(",") + "}";
  }
  return JSON.stringify(value);
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

// Sequence tokens for discarding responses that arrive after a newer
// request for the same view was already issued.
export class LatestTracker {
  private seq = 0;

  begin(): number {
    this.seq += 1;
    return this.seq;
  }

  isCurrent(token: number): boolean {
    return token === this.seq;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  getMeta(): Promise<MetaPayload> {
    return this.request("GET", "/api/meta");
  }

  predict(x: DesignVector): Promise<PredictPayload> {
    return this.request("POST", "/api/predict", { x });
  }

  generate(body: { y_request: RequestVector; n: number; seed: number }): Promise<GeneratePayload> {
    return this.request("POST", "/api/generate", body);
  }

  sensitivitySingle(x: DesignVector): Promise<SensitivitySinglePayload> {
    return this.request("POST", "/api/sensitivity", { x });
  }

  sensitivitySwarm(body: { y_request: RequestVector; n: number; seed: number }): Promise<SensitivitySwarmPayload> {
    return this.request("POST", "/api/sensitivity", body);
  }

  latent(): Promise<LatentPayload> {
    return this.request("GET", "/api/latent");
  }

  pareto(params: { source: string; n?: number; seed?: number; y_request?: string }): Promise<ParetoPayload> {
    const query = new URLSearchParams();
    query.set("source", params.source);
    if (params.n !== undefined) query.set("n", String(params.n));
    if (params.seed !== undefined) query.set("seed", String(params.seed));
    if (params.y_request !== undefined) query.set("y_request", params.y_request);
    return this.request("GET", `/api/pareto?${query.toString()}`);
  }

  private request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const key = `${method} ${path}\n${body === undefined ? "" : canonicalJson(body)}`;
    const pending = this.inflight.get(key);
    if (pending) return pending as Promise<T>;

    const promise = this.send<T>(method, path, body).finally(() => {
      this.inflight.delete(key);
    });
    this.inflight.set(key, promise);
    return promise;
  }

  private async send<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = canonicalJson(body);
    }
    const response = await this.fetchImpl(this.base + path, init);
    const payload = await response.json().catch(() => null);
    if (response.ok) return payload as T;

    // a 422 generate still carries the full result plus a warning field;
    // that is a usable answer, not a failure
    if (response.status === 422 && payload && typeof payload === "object" && "designs" in payload) {
      return payload as T;
    }
    const detail =
      payload && typeof payload === "object" && "detail" in payload
        ? String((payload as { detail: unknown }).detail)
        : `request failed with status ${response.status}`;
    throw new ApiError(response.status, detail);
  }
}
