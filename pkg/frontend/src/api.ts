/** Typed client for the dashboard API. All numbers shown in the UI come
 * from these payloads; the client does no model math of its own. */

export interface Meta {
  kind: string;
  feature_names: string[];
  column_kinds: string[];
  categories: Record<string, string[]>;
  class_names: string[];
  n_test_rows: number;
  weights: Record<string, number>;
}

export interface Prediction {
  proba: number;
  label: number;
}

export interface Contribution {
  name: string;
  phi: number;
  sign: string;
  value: number | string;
}

export interface Explanation {
  base_value: number;
  output_value: number;
  space: string;
  proba: number;
  label: number;
  contributions: Contribution[];
  reasons: string[];
  suggestions: string[];
  narrative_source: string;
}

export interface WhatIfResponse {
  original_proba: number;
  new_proba: number;
  edits: [string, number, number][];
  explanation: Explanation;
}

export interface ImportanceEntry {
  name: string;
  mean_abs_shap: number;
}

export interface SummaryFeature {
  name: string;
  shap_values: number[];
  norm_values: number[];
  raw_values: number[];
}

export interface Summary {
  feature_order: string[];
  features: SummaryFeature[];
}

export interface DependencePoint {
  value: number;
  shap: number;
}

export type InstanceValues = Record<string, number | string>;

export interface InstanceRef {
  row?: number;
  instance?: InstanceValues;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (...a) => fetch(...a)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, body?: unknown): Promise<T> {
    const init: RequestInit =
      body === undefined
        ? { method: "GET" }
        : {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
          };
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `API unreachable: ${String(err)}`);
    }
    if (!resp.ok) {
      let detail = `HTTP ${resp.status}`;
      try {
        const parsed = (await resp.json()) as { detail?: unknown };
        if (parsed.detail !== undefined) detail = JSON.stringify(parsed.detail);
      } catch {
        // body was not JSON; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  meta(): Promise<Meta> {
    return this.request<Meta>("/api/meta");
  }

  predict(ref: InstanceRef): Promise<Prediction> {
    return this.request<Prediction>("/api/predict", ref);
  }

  explain(ref: InstanceRef): Promise<Explanation> {
    return this.request<Explanation>("/api/explain", ref);
  }

  whatif(ref: InstanceRef, edits: InstanceValues): Promise<WhatIfResponse> {
    return this.request<WhatIfResponse>("/api/whatif", { ...ref, edits });
  }

  summary(): Promise<Summary> {
    return this.request<Summary>("/api/summary", {});
  }

  importance(topK?: number): Promise<{ ranking: ImportanceEntry[] }> {
    return this.request("/api/importance", topK === undefined ? {} : { top_k: topK });
  }

  dependence(feature: string): Promise<{ feature: string; points: DependencePoint[] }> {
    return this.request("/api/dependence", { feature });
  }
}
