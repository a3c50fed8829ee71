/** DOM rendering. Pure functions of the session state; no model math. */

import { SessionStore, formatProba, riskBand } from "./session.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderGauge(target: HTMLElement, store: SessionStore): void {
  target.innerHTML = "";
  if (store.probability === null) {
    target.appendChild(el("div", "gauge-empty", "no prediction"));
    return;
  }
  const band = riskBand(store.probability);
  const wrap = el("div", `gauge gauge-${band}`);
  const fill = el("div", "gauge-fill");
  fill.style.width = `${(store.probability * 100).toFixed(1)}%`;
  wrap.appendChild(fill);
  wrap.appendChild(el("span", "gauge-label", formatProba(store.probability)));
  target.appendChild(wrap);
}

export function renderForcePlot(target: HTMLElement, store: SessionStore): void {
  target.innerHTML = "";
  const expl = store.explanation;
  if (!expl) return;
  const bars = store.contributionBars();
  for (const bar of bars) {
    const row = el("div", `bar bar-${bar.direction}`);
    row.appendChild(el("span", "bar-name", `${bar.name} = ${bar.value}`));
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill");
    fill.style.width = `${(bar.magnitude * 100).toFixed(1)}%`;
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "bar-phi", bar.phi.toFixed(4)));
    target.appendChild(row);
  }
  const total = store.contributionTotal();
  if (total !== null) {
    target.appendChild(
      el(
        "div",
        "bar-total",
        `sum of contributions ${total.toFixed(4)} = output ${expl.output_value.toFixed(4)} − base ${expl.base_value.toFixed(4)}`,
      ),
    );
  }
}

export function renderNarrative(target: HTMLElement, store: SessionStore): void {
  target.innerHTML = "";
  const expl = store.explanation;
  if (!expl) return;
  const reasons = el("ul", "narrative-reasons");
  for (const r of expl.reasons) reasons.appendChild(el("li", undefined, r));
  const suggestions = el("ul", "narrative-suggestions");
  for (const s of expl.suggestions) suggestions.appendChild(el("li", undefined, s));
  target.appendChild(el("h3", undefined, "Why"));
  target.appendChild(reasons);
  if (expl.suggestions.length) {
    target.appendChild(el("h3", undefined, "Retention suggestions"));
    target.appendChild(suggestions);
  }
}

export function renderHistory(
  target: HTMLElement,
  store: SessionStore,
  onRestore: (index: number) => void,
): void {
  target.innerHTML = "";
  store.history.forEach((entry, i) => {
    const row = el("div", "history-entry");
    const label = Object.entries(entry.edits)
      .map(([k, v]) => `${k}→${v}`)
      .join(", ");
    row.appendChild(
      el(
        "span",
        undefined,
        `${label}: ${formatProba(entry.beforeProba)} → ${formatProba(entry.afterProba)}`,
      ),
    );
    const btn = el("button", "history-restore", "view") as HTMLButtonElement;
    btn.addEventListener("click", () => onRestore(i));
    row.appendChild(btn);
    target.appendChild(row);
  });
}

export function renderError(target: HTMLElement, store: SessionStore): void {
  target.innerHTML = "";
  if (store.error) {
    target.appendChild(el("div", "error-banner", store.error));
  }
}

export function renderForm(
  target: HTMLElement,
  store: SessionStore,
  onChange: (name: string, value: string) => void,
): void {
  target.innerHTML = "";
  if (!store.meta) return;
  const invalid = new Set(store.invalidFields());
  store.meta.feature_names.forEach((name, j) => {
    const row = el("label", invalid.has(name) ? "field field-invalid" : "field");
    row.appendChild(el("span", "field-name", name));
    const legal = store.meta!.categories[name];
    if (legal) {
      const select = document.createElement("select");
      select.appendChild(el("option", undefined, "") as HTMLOptionElement);
      for (const option of legal) {
        const opt = el("option", undefined, option) as HTMLOptionElement;
        opt.value = option;
        select.appendChild(opt);
      }
      select.value = String(store.form[name] ?? "");
      select.addEventListener("change", () => onChange(name, select.value));
      row.appendChild(select);
    } else {
      const input = document.createElement("input");
      input.type = "number";
      input.value = String(store.form[name] ?? "");
      input.addEventListener("input", () => onChange(name, input.value));
      row.appendChild(input);
    }
    row.title = store.meta!.column_kinds[j];
    target.appendChild(row);
  });
}
