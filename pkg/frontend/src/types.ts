// Payload shapes mirrored from the service API (/api/v1).

export type RatingLabel = "Low" | "Medium" | "High";
export type ClassificationLabel = "Acceptable" | "RequiresTreatment";
export type RiskStatusLabel = "Open" | "Treated" | "Retired";
export type MethodLabel = "acceptance" | "avoidance" | "limitation" | "transfer";
export type PhaseLabel = "Plan" | "Do" | "Check" | "Act";

export interface Envelope<T> {
  payload?: T;
  error?: { code: string; message: string };
  register_revision: number;
}

export interface AssetRow {
  asset_id: string;
  name: string;
  category: string;
  confidentiality: RatingLabel;
  integrity: RatingLabel;
  availability: RatingLabel;
  asset_value: number;
}

export interface RiskRow {
  risk_id: string;
  asset_id: string;
  threat_id: string;
  threat_rating: RatingLabel;
  vuln_id: string;
  vuln_rating: RatingLabel;
  risk_value: number;
  classification: ClassificationLabel;
  status: RiskStatusLabel;
}

export interface DecisionRow {
  decision_id: string;
  risk_id: string;
  method: string;
  justification: string;
  selected_controls: string[];
  residual_threat: RatingLabel | null;
  residual_vuln: RatingLabel | null;
  transferee: string | null;
  residual_risk: number;
  decided_at: string;
}

export interface RegisterDoc {
  format: string;
  scope_statement: string;
  policy_statement: string;
  acceptance_threshold: number;
  catalog_version: string;
  assets: AssetRow[];
  risks: RiskRow[];
  treatments: DecisionRow[];
  revision: number;
}

export interface ChecklistItem {
  item_id: string;
  description: string;
  satisfied: boolean;
  detail: string;
}

export interface PdcaPayload {
  phase: PhaseLabel;
  iteration: number;
  checklist_items: ChecklistItem[];
  can_advance: boolean;
  history: { phase: PhaseLabel; timestamp: string; note: string }[];
}

export interface SoaEntry {
  question_id: string;
  domain_no: number;
  included: boolean;
  justification: string;
  linked_risk_ids: string[];
}

export interface SoaDoc {
  format: string;
  generated_at: string;
  register_revision: number;
  catalog_version: string;
  entries: SoaEntry[];
}

export interface DomainEntry {
  domain_no: number;
  name: string;
  description: string;
}

export interface CatalogVulnerability {
  vuln_id: string;
  description: string;
  control_refs: string[];
  technique_refs: string[];
}

export interface CatalogThreat {
  threat_id: string;
  asset_category: string;
  name: string;
  description: string;
  vulnerabilities: CatalogVulnerability[];
}

export interface TreatmentResult {
  decision: DecisionRow;
  risk: RiskRow;
}
