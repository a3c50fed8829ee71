import { Explanation, Meta, Prediction, WhatIfResponse } from "../src/api.js";

export const meta: Meta = {
  kind: "XGBStyleGBDT",
  feature_names: ["Age", "MonthlyIncome", "OverTime", "StockOptionLevel"],
  column_kinds: ["numeric", "numeric", "categorical", "numeric"],
  categories: { OverTime: ["Yes", "No"] },
  class_names: ["No", "Yes"],
  n_test_rows: 294,
  weights: { StockOptionLevel: 2 },
};

export const prediction: Prediction = { proba: 0.84, label: 1 };

export const explanation: Explanation = {
  base_value: -1.2,
  output_value: 1.65,
  space: "margin",
  proba: 0.84,
  label: 1,
  contributions: [
    { name: "OverTime", phi: 1.9, sign: "+", value: "Yes" },
    { name: "MonthlyIncome", phi: 0.7, sign: "+", value: 2100 },
    { name: "StockOptionLevel", phi: 0.35, sign: "+", value: 0 },
    { name: "Age", phi: -0.1, sign: "-", value: 27 },
  ],
  reasons: ["OverTime (SHAP value: 1.90) pushes toward leaving."],
  suggestions: ["Reduce or compensate overtime."],
  narrative_source: "template",
};

export const afterExplanation: Explanation = {
  ...explanation,
  output_value: -0.55,
  proba: 0.163,
  label: 0,
  contributions: [
    { name: "OverTime", phi: 0.4, sign: "+", value: "No" },
    { name: "MonthlyIncome", phi: 0.2, sign: "+", value: 3150 },
    { name: "StockOptionLevel", phi: 0.15, sign: "+", value: 1 },
    { name: "Age", phi: -0.1, sign: "-", value: 27 },
  ],
  reasons: ["OverTime (SHAP value: 0.40) pushes toward leaving."],
};

export const whatIf: WhatIfResponse = {
  original_proba: 0.84,
  new_proba: 0.163,
  edits: [
    ["OverTime", 0, 1],
    ["MonthlyIncome", 2100, 3150],
  ],
  explanation: afterExplanation,
};

type Route = (body: unknown) => { status: number; payload: unknown };

/** fetch stub keyed by path; records every call for interception checks */
export function mockFetch(routes: Record<string, Route>) {
  const calls: { path: string; body: unknown }[] = [];
  const fetchFn = async (input: string, init?: RequestInit) => {
    const path = input.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ path, body });
    const route = routes[path];
    if (!route) {
      return new Response(JSON.stringify({ detail: "not found" }), { status: 404 });
    }
    const { status, payload } = route(body);
    return new Response(JSON.stringify(payload), { status });
  };
  return { fetchFn, calls };
}

export function happyRoutes(): Record<string, Route> {
  return {
    "/api/meta": () => ({ status: 200, payload: meta }),
    "/api/predict": () => ({ status: 200, payload: prediction }),
    "/api/explain": () => ({ status: 200, payload: explanation }),
    "/api/whatif": () => ({ status: 200, payload: whatIf }),
  };
}
