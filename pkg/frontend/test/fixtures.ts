// Shared builders for workbench unit tests.

import type { Workspace } from "../src/api.js";
import type {
  AssetRow,
  PdcaPayload,
  RatingLabel,
  RegisterDoc,
  RiskRow,
  SoaDoc,
} from "../src/types.js";

export function asset(id: string, value: number, overrides: Partial<AssetRow> = {}): AssetRow {
  const ratings: Record<number, [RatingLabel, RatingLabel, RatingLabel]> = {
    3: ["Low", "Low", "Low"],
    5: ["Low", "Medium", "Medium"],
    6: ["Medium", "Medium", "Medium"],
    7: ["Medium", "Medium", "High"],
    9: ["High", "High", "High"],
  };
  const [confidentiality, integrity, availability] = ratings[value] ?? ratings[6];
  return {
    asset_id: id,
    name: `device ${id}`,
    category: "Layer2",
    confidentiality,
    integrity,
    availability,
    asset_value: value,
    ...overrides,
  };
}

export function risk(
  id: string,
  assetId: string,
  assetValue: number,
  threat: RatingLabel,
  vuln: RatingLabel,
  overrides: Partial<RiskRow> = {},
): RiskRow {
  const numbers: Record<RatingLabel, number> = { Low: 1, Medium: 2, High: 3 };
  const value = assetValue * numbers[threat] * numbers[vuln];
  return {
    risk_id: id,
    asset_id: assetId,
    threat_id: "l2.mac-table-overflow",
    threat_rating: threat,
    vuln_id: "l2.mac-flooding",
    vuln_rating: vuln,
    risk_value: value,
    classification: value > 27 ? "RequiresTreatment" : "Acceptable",
    status: "Open",
    ...overrides,
  };
}

export function workspace(assets: AssetRow[], risks: RiskRow[], threshold = 27): Workspace {
  const register: RegisterDoc = {
    format: "isms-register/1",
    scope_statement: "LAN and its devices",
    policy_statement: "device security",
    acceptance_threshold: threshold,
    catalog_version: "lan-v1",
    assets,
    risks,
    treatments: [],
    revision: 1,
  };
  const pdca: PdcaPayload = {
    phase: "Plan",
    iteration: 1,
    checklist_items: [],
    can_advance: false,
    history: [],
  };
  const soa: SoaDoc = {
    format: "isms-soa/1",
    generated_at: "2026-08-10T12:00:00Z",
    register_revision: 1,
    catalog_version: "lan-v1",
    entries: [],
  };
  return { register, assets, risks, pdca, soa, domains: [] };
}
