/** View-model for the dashboard session.
 *
 * Holds the editable instance form, the latest prediction/explanation,
 * staged what-if edits, and the scenario history. Every displayed number
 * is taken verbatim from the most recent API response; when a request
 * fails the stale numbers are cleared rather than left on screen.
 */

import {
  ApiClient,
  ApiError,
  Explanation,
  InstanceRef,
  InstanceValues,
  Meta,
  WhatIfResponse,
} from "./api.js";

export interface HistoryEntry {
  edits: InstanceValues;
  beforeProba: number;
  afterProba: number;
  explanation: Explanation;
}

export interface ContributionBar {
  name: string;
  phi: number;
  /** bar length as a fraction of the largest |phi|, in [0, 1] */
  magnitude: number;
  direction: "up" | "down";
  value: number | string;
}

export class SessionStore {
  meta: Meta | null = null;
  /** form values keyed by feature name; categorical fields hold text */
  form: InstanceValues = {};
  /** which reference the latest results describe */
  current: InstanceRef | null = null;
  probability: number | null = null;
  explanation: Explanation | null = null;
  stagedEdits: InstanceValues = {};
  history: HistoryEntry[] = [];
  lastWhatIf: WhatIfResponse | null = null;
  error: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async init(): Promise<void> {
    try {
      this.meta = await this.api.meta();
      this.error = null;
    } catch (err) {
      this.fail(err);
    }
  }

  /** Missing or illegal fields that keep manual submission disabled. */
  invalidFields(): string[] {
    if (!this.meta) return [];
    const bad: string[] = [];
    for (const name of this.meta.feature_names) {
      const value = this.form[name];
      if (value === undefined || value === "") {
        bad.push(name);
        continue;
      }
      const legal = this.meta.categories[name];
      if (legal) {
        if (!legal.includes(String(value))) bad.push(name);
      } else if (typeof value === "string" && Number.isNaN(Number(value))) {
        bad.push(name);
      }
    }
    return bad;
  }

  get canSubmitForm(): boolean {
    return this.meta !== null && this.invalidFields().length === 0;
  }

  get canApplyWhatIf(): boolean {
    return this.current !== null && Object.keys(this.stagedEdits).length > 0;
  }

  setField(name: string, value: number | string): void {
    this.form[name] = value;
  }

  stageEdit(name: string, value: number | string): void {
    this.stagedEdits[name] = value;
  }

  unstageEdit(name: string): void {
    delete this.stagedEdits[name];
  }

  clearEdits(): void {
    this.stagedEdits = {};
  }

  /** Fetch predict + explain for a test row and populate the view. */
  async loadRow(row: number): Promise<void> {
    await this.load({ row });
  }

  /** Submit the manual-entry form. */
  async loadForm(): Promise<void> {
    if (!this.canSubmitForm) {
      throw new Error(`form incomplete: ${this.invalidFields().join(", ")}`);
    }
    const instance: InstanceValues = {};
    for (const name of this.meta!.feature_names) {
      const value = this.form[name];
      instance[name] = this.meta!.categories[name] ? String(value) : Number(value);
    }
    await this.load({ instance });
  }

  private async load(ref: InstanceRef): Promise<void> {
    try {
      const pred = await this.api.predict(ref);
      const expl = await this.api.explain(ref);
      this.current = ref;
      this.probability = pred.proba;
      this.explanation = expl;
      this.stagedEdits = {};
      this.lastWhatIf = null;
      this.error = null;
    } catch (err) {
      this.fail(err);
    }
  }

  async applyWhatIf(): Promise<void> {
    if (!this.canApplyWhatIf) {
      throw new Error("no staged edits");
    }
    try {
      const resp = await this.api.whatif(this.current!, this.stagedEdits);
      this.history.push({
        edits: { ...this.stagedEdits },
        beforeProba: resp.original_proba,
        afterProba: resp.new_proba,
        explanation: resp.explanation,
      });
      this.lastWhatIf = resp;
      this.probability = resp.new_proba;
      this.explanation = resp.explanation;
      this.stagedEdits = {};
      this.error = null;
    } catch (err) {
      this.fail(err);
    }
  }

  /** Re-render a past scenario exactly as it was served. */
  restore(index: number): void {
    const entry = this.history[index];
    if (!entry) throw new Error(`no history entry ${index}`);
    this.probability = entry.afterProba;
    this.explanation = entry.explanation;
    this.lastWhatIf = null;
    this.error = null;
  }

  /** Ordered bar data for the force plot; lengths are relative to the
   * largest contribution so the chart is self-scaling. */
  contributionBars(topK = 10): ContributionBar[] {
    if (!this.explanation) return [];
    const contributions = this.explanation.contributions.slice(0, topK);
    const peak = Math.max(...contributions.map((c) => Math.abs(c.phi)), 1e-12);
    return contributions.map((c) => ({
      name: c.name,
      phi: c.phi,
      magnitude: Math.abs(c.phi) / peak,
      direction: c.phi >= 0 ? "up" : "down",
      value: c.value,
    }));
  }

  /** Annotated on the chart: the bars must account for output - base. */
  contributionTotal(): number | null {
    if (!this.explanation) return null;
    return this.explanation.contributions.reduce((acc, c) => acc + c.phi, 0);
  }

  private fail(err: unknown): void {
    this.error =
      err instanceof ApiError ? err.message : `unexpected error: ${String(err)}`;
    // never show numbers that no longer correspond to a response
    this.probability = null;
    this.explanation = null;
    this.lastWhatIf = null;
  }
}

/** Gauge band for the probability dial. */
export function riskBand(proba: number): "low" | "medium" | "high" {
  if (proba < 0.3) return "low";
  if (proba < 0.6) return "medium";
  return "high";
}

/** Percent text shown next to the gauge; rendered verbatim from the API value. */
export function formatProba(proba: number): string {
  return `${(proba * 100).toFixed(1)}%`;
}
