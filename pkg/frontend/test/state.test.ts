import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import {
  apiFailed,
  initialState,
  treatmentSubmitted,
  workspaceLoaded,
} from "../src/state.js";
import { renderBanner } from "../src/views.js";
import { asset, risk, workspace } from "./fixtures.js";

describe("apiFailed", () => {
  it("a 409 marks the revision stale and prompts a reload, never retries", () => {
    const state = apiFailed(initialState(), new ApiError(409, "RevisionMismatch", "stale", 7));
    expect(state.staleRevision).toBe(true);
    expect(state.banner?.kind).toBe("stale");
    const html = renderBanner(state);
    expect(html).toContain("Reload workspace");
    expect(html).toContain('data-action="reload"');
  });

  it("other errors surface as non-blocking banners", () => {
    const state = apiFailed(
      initialState(),
      new ApiError(422, "MissingControls", "limitation requires controls", 3),
    );
    expect(state.staleRevision).toBe(false);
    expect(state.banner?.kind).toBe("error");
    expect(state.banner?.text).toContain("MissingControls");
  });
});

describe("workspaceLoaded", () => {
  it("clears stale/banner state after a reload", () => {
    const stale = apiFailed(initialState(), new ApiError(409, "RevisionMismatch", "stale", 7));
    const loaded = workspaceLoaded(stale, workspace([asset("a-001", 9)], []));
    expect(loaded.staleRevision).toBe(false);
    expect(loaded.banner).toBeNull();
    expect(loaded.workspace?.assets).toHaveLength(1);
  });
});

describe("treatmentSubmitted", () => {
  it("closes the form and marks the SoA preview stale", () => {
    const base = workspaceLoaded(
      initialState(),
      workspace([asset("a-001", 9)], [risk("r-001", "a-001", 9, "High", "High")]),
    );
    const next = treatmentSubmitted({ ...base, form: null, busy: true });
    expect(next.form).toBeNull();
    expect(next.busy).toBe(false);
    expect(next.soaStale).toBe(true);
  });
});
