// Application state and its pure transitions. All views render from
// (workspace snapshot, form state); the DOM layer in main.ts only wires
// events and re-renders, so everything here is testable without a browser.

import { ApiError, type Workspace } from "./api.js";
import type { TreatmentFormState } from "./treatment.js";

export type ViewName = "matrix" | "assets" | "queue" | "soa" | "pdca";

export interface Banner {
  kind: "error" | "stale" | "info";
  text: string;
}

export interface AppState {
  view: ViewName;
  workspace: Workspace | null;
  form: TreatmentFormState | null; // open treatment form, if any
  banner: Banner | null;
  staleRevision: boolean; // a 409 happened; reload required before writing
  busy: boolean; // one in-flight mutation at a time
  soaStale: boolean; // a decision landed after the last SoA generation
}

export function initialState(): AppState {
  return {
    view: "matrix",
    workspace: null,
    form: null,
    banner: null,
    staleRevision: false,
    busy: false,
    soaStale: false,
  };
}

export function workspaceLoaded(state: AppState, workspace: Workspace): AppState {
  return {
    ...state,
    workspace,
    banner: null,
    staleRevision: false,
    busy: false,
    soaStale: false,
  };
}

// Error handling: a 409 means this tab's revision is stale (an external edit
// happened, e.g. through the CLI); prompt a reload and never overwrite
// silently. Other API errors surface as non-blocking banners.
export function apiFailed(state: AppState, error: unknown): AppState {
  if (error instanceof ApiError && error.status === 409) {
    return {
      ...state,
      busy: false,
      staleRevision: true,
      banner: {
        kind: "stale",
        text:
          `register changed elsewhere (${error.code}): reload the workspace ` +
          "before making further changes",
      },
    };
  }
  const text =
    error instanceof ApiError
      ? `${error.code}: ${error.message}`
      : `request failed: ${String(error)}`;
  return { ...state, busy: false, banner: { kind: "error", text } };
}

export function treatmentSubmitted(state: AppState): AppState {
  // The decision persisted; matrix and queue refresh from the next snapshot,
  // and the SoA preview is stale until regenerated.
  return { ...state, form: null, busy: false, soaStale: true };
}

export function openForm(state: AppState, form: TreatmentFormState): AppState {
  return { ...state, form };
}

export function switchView(state: AppState, view: ViewName): AppState {
  return { ...state, view };
}
