import { ApiClient } from "./api.js";
import {
  renderError,
  renderForcePlot,
  renderForm,
  renderGauge,
  renderHistory,
  renderNarrative,
} from "./render.js";
import { SessionStore } from "./session.js";

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

export async function boot(base = ""): Promise<SessionStore> {
  const store = new SessionStore(new ApiClient(base));
  await store.init();

  const rowInput = byId("row-input") as HTMLInputElement;
  const loadBtn = byId("load-row") as HTMLButtonElement;
  const submitBtn = byId("submit-form") as HTMLButtonElement;
  const applyBtn = byId("apply-whatif") as HTMLButtonElement;
  const editName = byId("edit-name") as HTMLSelectElement;
  const editValue = byId("edit-value") as HTMLInputElement;
  const stageBtn = byId("stage-edit") as HTMLButtonElement;

  const redraw = () => {
    renderError(byId("errors"), store);
    renderGauge(byId("gauge"), store);
    renderForcePlot(byId("force-plot"), store);
    renderNarrative(byId("narrative"), store);
    renderHistory(byId("history"), store, (i) => {
      store.restore(i);
      redraw();
    });
    renderForm(byId("instance-form"), store, (name, value) => {
      store.setField(name, value);
      submitBtn.disabled = !store.canSubmitForm;
      redraw();
    });
    submitBtn.disabled = !store.canSubmitForm;
    applyBtn.disabled = !store.canApplyWhatIf;
    if (store.meta && editName.options.length === 0) {
      for (const name of store.meta.feature_names) {
        const opt = document.createElement("option");
        opt.value = name;
        opt.textContent = name;
        editName.appendChild(opt);
      }
    }
  };

  loadBtn.addEventListener("click", async () => {
    await store.loadRow(Number(rowInput.value));
    redraw();
  });
  submitBtn.addEventListener("click", async () => {
    await store.loadForm();
    redraw();
  });
  stageBtn.addEventListener("click", () => {
    if (editName.value) store.stageEdit(editName.value, editValue.value);
    redraw();
  });
  applyBtn.addEventListener("click", async () => {
    await store.applyWhatIf();
    redraw();
  });

  redraw();
  return store;
}

declare global {
  interface Window {
    attrilensBoot: typeof boot;
  }
}

if (typeof window !== "undefined") {
  window.attrilensBoot = boot;
}
