// DOM bootstrap: owns the root element, delegates events by data-action,
// and keeps exactly one mutation in flight. All rendering and state logic
// lives in the pure modules.

import { ApiClient, loadWorkspace } from "./api.js";
import { emptyForm, toRequestBody, type TreatmentFormState } from "./treatment.js";
import {
  apiFailed,
  initialState,
  openForm,
  switchView,
  treatmentSubmitted,
  workspaceLoaded,
  type AppState,
  type ViewName,
} from "./state.js";
import { renderApp } from "./views.js";
import type { RatingLabel } from "./types.js";

const client = new ApiClient("");
let state: AppState = initialState();
const root = document.getElementById("app")!;

function render(): void {
  root.innerHTML = renderApp(state);
}

function set(next: AppState): void {
  state = next;
  render();
}

async function reload(): Promise<void> {
  try {
    set(workspaceLoaded(state, await loadWorkspace(client)));
  } catch (error) {
    set(apiFailed(state, error));
  }
}

async function mutate(action: () => Promise<unknown>, refreshAfter = true): Promise<void> {
  if (state.busy || state.staleRevision) return;
  set({ ...state, busy: true });
  try {
    await action();
    if (refreshAfter) {
      const workspace = await loadWorkspace(client);
      set(workspaceLoaded({ ...state, busy: false }, workspace));
    }
  } catch (error) {
    set(apiFailed(state, error));
  }
}

function readForm(container: HTMLElement, form: TreatmentFormState): TreatmentFormState {
  const value = (name: string) =>
    (container.querySelector(`[name="${name}"]`) as HTMLInputElement | HTMLSelectElement | null)
      ?.value ?? "";
  const controls = [...container.querySelectorAll('input[name="control"]:checked')].map(
    (el) => (el as HTMLInputElement).value,
  );
  return {
    ...form,
    method: (value("method") || form.method) as TreatmentFormState["method"],
    justification: value("justification"),
    selectedControls: controls,
    residualThreat: (value("residual_threat") || null) as RatingLabel | null,
    residualVuln: (value("residual_vuln") || null) as RatingLabel | null,
    transferee: value("transferee"),
  };
}

async function openTreatmentForm(riskId: string): Promise<void> {
  const workspace = state.workspace;
  if (!workspace) return;
  const risk = workspace.risks.find((r) => r.risk_id === riskId);
  if (!risk) return;
  try {
    const vulnerabilities = await client.getVulnerabilities(risk.threat_id);
    const vulnerability = vulnerabilities.find((v) => v.vuln_id === risk.vuln_id);
    const options = (vulnerability?.control_refs ?? []).map((question_id) => ({ question_id }));
    set(openForm(switchView(state, "queue"), emptyForm(riskId, options)));
  } catch (error) {
    set(apiFailed(state, error));
  }
}

document.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest("[data-action]") as HTMLElement | null;
  if (!target) return;
  const action = target.dataset.action!;
  if (action === "view") {
    set(switchView(state, target.dataset.view as ViewName));
  } else if (action === "reload") {
    void reload();
  } else if (action === "open-form") {
    void openTreatmentForm(target.dataset.risk!);
  } else if (action === "submit-treatment") {
    event.preventDefault();
    const riskId = target.dataset.risk!;
    const container = target.closest("form")!;
    const form = readForm(container as HTMLElement, state.form!);
    void mutate(async () => {
      await client.submitTreatment(riskId, toRequestBody(form));
      state = treatmentSubmitted(state);
    });
  } else if (action === "rate") {
    const assetId = target.dataset.asset!;
    const row = target.closest("tr")!;
    const pick = (name: string) =>
      (row.querySelector(`select[name="${name}"]`) as HTMLSelectElement).value as RatingLabel;
    void mutate(() =>
      client.rateAsset(assetId, {
        confidentiality: pick("confidentiality"),
        integrity: pick("integrity"),
        availability: pick("availability"),
      }),
    );
  } else if (action === "generate-soa") {
    void mutate(() => client.generateSoa());
  } else if (action === "advance") {
    const note =
      (document.querySelector('input[name="advance-note"]') as HTMLInputElement | null)?.value ??
      "";
    void mutate(() => client.advancePdca(note));
  }
});

// live re-render of the open treatment form (residual preview, validation)
document.addEventListener("change", (event) => {
  const container = (event.target as HTMLElement).closest("form.treatment");
  if (!container || !state.form) return;
  set({ ...state, form: readForm(container as HTMLElement, state.form) });
});

void reload();
