// Risk matrix view model: rows are asset-value bands (3..9), columns are
// threat x vulnerability product bands (the attainable products 1,2,3,4,6,9).
// Every non-retired risk lands in exactly one cell, recomputable from its
// ratings; the threshold line marks where value x product crosses the
// acceptance level.

import type { AssetRow, ClassificationLabel, RatingLabel, RiskRow, RiskStatusLabel } from "./types.js";

export const RATING_NUMBER: Record<RatingLabel, number> = { Low: 1, Medium: 2, High: 3 };

export const ASSET_VALUE_BANDS = [3, 4, 5, 6, 7, 8, 9] as const;
export const PRODUCT_BANDS = [1, 2, 3, 4, 6, 9] as const;

export interface CellEntry {
  risk_id: string;
  classification: ClassificationLabel;
  status: RiskStatusLabel;
}

export interface MatrixCell {
  asset_value: number;
  product: number;
  entries: CellEntry[];
}

export interface RiskMatrixViewModel {
  cells: Record<string, MatrixCell>;
  placements: Record<string, string>; // risk_id -> cell key
  threshold: number;
}

export function cellKey(assetValue: number, product: number): string {
  return `${assetValue}x${product}`;
}

export function productOf(risk: Pick<RiskRow, "threat_rating" | "vuln_rating">): number {
  return RATING_NUMBER[risk.threat_rating] * RATING_NUMBER[risk.vuln_rating];
}

export function buildRiskMatrix(
  risks: RiskRow[],
  assets: AssetRow[],
  threshold: number,
): RiskMatrixViewModel {
  const assetValues = new Map(assets.map((a) => [a.asset_id, a.asset_value]));
  const cells: Record<string, MatrixCell> = {};
  const placements: Record<string, string> = {};
  for (const risk of risks) {
    if (risk.status === "Retired") continue;
    const assetValue = assetValues.get(risk.asset_id);
    if (assetValue === undefined) continue;
    const product = productOf(risk);
    const key = cellKey(assetValue, product);
    if (!(key in cells)) {
      cells[key] = { asset_value: assetValue, product, entries: [] };
    }
    cells[key].entries.push({
      risk_id: risk.risk_id,
      classification: risk.classification,
      status: risk.status,
    });
    placements[risk.risk_id] = key;
  }
  return { cells, placements, threshold };
}

export function classificationColor(classification: ClassificationLabel, status: RiskStatusLabel): string {
  if (status !== "Open") return "#2980b9"; // decided
  return classification === "RequiresTreatment" ? "#e74c3c" : "#27ae60";
}

// Index into PRODUCT_BANDS of the first column whose value x product is
// strictly above the threshold; PRODUCT_BANDS.length when no column crosses.
export function thresholdColumn(assetValue: number, threshold: number): number {
  for (let i = 0; i < PRODUCT_BANDS.length; i++) {
    if (assetValue * PRODUCT_BANDS[i] > threshold) return i;
  }
  return PRODUCT_BANDS.length;
}

// Open risks that still need a decision, highest value first: the
// treatment queue order.
export function treatmentQueue(risks: RiskRow[]): RiskRow[] {
  return risks
    .filter((r) => r.status === "Open" && r.classification === "RequiresTreatment")
    .sort(
      (a, b) =>
        b.risk_value - a.risk_value ||
        a.asset_id.localeCompare(b.asset_id) ||
        a.threat_id.localeCompare(b.threat_id),
    );
}
