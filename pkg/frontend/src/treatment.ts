// Treatment form state and client-side validation mirroring the server's
// preconditions. The residual shown while editing is an advisory preview
// (same product rule the server applies); the server-computed value is the
// one displayed after submission.

import { RATING_NUMBER } from "./matrix.js";
import type { TreatmentRequest } from "./api.js";
import type { MethodLabel, RatingLabel, RiskRow } from "./types.js";

export interface ControlOption {
  question_id: string;
}

export interface TreatmentFormState {
  riskId: string;
  method: MethodLabel;
  justification: string;
  availableControls: ControlOption[]; // from catalog lookup for the risk's threat/vuln
  selectedControls: string[];
  residualThreat: RatingLabel | null;
  residualVuln: RatingLabel | null;
  transferee: string;
}

export function emptyForm(riskId: string, availableControls: ControlOption[]): TreatmentFormState {
  return {
    riskId,
    method: "acceptance",
    justification: "",
    availableControls,
    selectedControls: [],
    residualThreat: null,
    residualVuln: null,
    transferee: "",
  };
}

// Problems that keep submit disabled; empty list means the form may be sent.
// The server remains the authority and re-validates everything.
export function validateForm(form: TreatmentFormState, risk: RiskRow): string[] {
  const problems: string[] = [];
  if (!form.justification.trim()) {
    problems.push("justification is required");
  }
  if (form.method === "limitation") {
    if (form.selectedControls.length === 0) {
      problems.push("select at least one control");
    }
    const available = new Set(form.availableControls.map((c) => c.question_id));
    for (const control of form.selectedControls) {
      if (!available.has(control)) {
        problems.push(`control ${control} is not mapped to this risk`);
      }
    }
    if (
      form.residualThreat !== null &&
      RATING_NUMBER[form.residualThreat] > RATING_NUMBER[risk.threat_rating]
    ) {
      problems.push("residual threat exceeds the original rating");
    }
    if (
      form.residualVuln !== null &&
      RATING_NUMBER[form.residualVuln] > RATING_NUMBER[risk.vuln_rating]
    ) {
      problems.push("residual vulnerability exceeds the original rating");
    }
  }
  if (form.method === "transfer" && !form.transferee.trim()) {
    problems.push("transferee is required");
  }
  return problems;
}

export function canSubmit(form: TreatmentFormState, risk: RiskRow): boolean {
  return validateForm(form, risk).length === 0;
}

// Advisory preview of the residual the server will compute.
export function residualPreview(
  form: TreatmentFormState,
  risk: RiskRow,
  assetValue: number,
): number {
  switch (form.method) {
    case "avoidance":
      return 0;
    case "limitation": {
      const threat = form.residualThreat ?? risk.threat_rating;
      const vuln = form.residualVuln ?? risk.vuln_rating;
      return assetValue * RATING_NUMBER[threat] * RATING_NUMBER[vuln];
    }
    default:
      return risk.risk_value;
  }
}

export function toRequestBody(form: TreatmentFormState): TreatmentRequest {
  const body: TreatmentRequest = {
    method: form.method,
    justification: form.justification,
  };
  if (form.method === "limitation") {
    body.controls = form.selectedControls;
    if (form.residualThreat) body.residual_threat = form.residualThreat;
    if (form.residualVuln) body.residual_vuln = form.residualVuln;
  }
  if (form.method === "transfer") {
    body.transferee = form.transferee;
  }
  return body;
}
