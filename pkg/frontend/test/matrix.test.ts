import { describe, expect, it } from "vitest";

import {
  PRODUCT_BANDS,
  buildRiskMatrix,
  cellKey,
  classificationColor,
  productOf,
  thresholdColumn,
  treatmentQueue,
} from "../src/matrix.js";
import { asset, risk } from "./fixtures.js";

describe("buildRiskMatrix", () => {
  const assets = [asset("a-001", 9), asset("a-002", 5)];
  const risks = [
    risk("r-001", "a-001", 9, "High", "High"), // 81, cell 9x9
    risk("r-002", "a-001", 9, "Medium", "Low"), // 18, cell 9x2
    risk("r-003", "a-002", 5, "Medium", "Medium"), // 20, cell 5x4
    risk("r-004", "a-002", 5, "High", "High", { status: "Retired" }),
  ];

  it("places every non-retired risk in exactly one cell", () => {
    const vm = buildRiskMatrix(risks, assets, 27);
    const placed = Object.keys(vm.placements);
    expect(placed.sort()).toEqual(["r-001", "r-002", "r-003"]);
    const total = Object.values(vm.cells).reduce((n, cell) => n + cell.entries.length, 0);
    expect(total).toBe(3);
  });

  it("cell placement is recomputable from the record ratings", () => {
    const vm = buildRiskMatrix(risks, assets, 27);
    for (const r of risks.filter((r) => r.status !== "Retired")) {
      const assetValue = assets.find((a) => a.asset_id === r.asset_id)!.asset_value;
      expect(vm.placements[r.risk_id]).toBe(cellKey(assetValue, productOf(r)));
      expect(assetValue * productOf(r)).toBe(r.risk_value);
    }
  });

  it("excludes retired risks", () => {
    const vm = buildRiskMatrix(risks, assets, 27);
    expect(vm.placements["r-004"]).toBeUndefined();
  });

  it("keeps treated risks visible but recolored", () => {
    const treated = risk("r-005", "a-001", 9, "High", "High", { status: "Treated" });
    const vm = buildRiskMatrix([treated], assets, 27);
    expect(vm.placements["r-005"]).toBe(cellKey(9, 9));
    expect(classificationColor("RequiresTreatment", "Treated")).not.toBe(
      classificationColor("RequiresTreatment", "Open"),
    );
  });
});

describe("thresholdColumn", () => {
  it("marks the first product column strictly above the threshold", () => {
    // asset value 9, threshold 27: 9*3=27 not above, 9*4=36 above -> index of 4
    expect(thresholdColumn(9, 27)).toBe(PRODUCT_BANDS.indexOf(4));
    // asset value 3, threshold 27: 3*9=27 not above -> no column crosses
    expect(thresholdColumn(3, 27)).toBe(PRODUCT_BANDS.length);
    // asset value 9, threshold 3: first column 9*1=9 already above
    expect(thresholdColumn(9, 3)).toBe(0);
  });
});

describe("treatmentQueue", () => {
  it("lists open above-threshold risks, highest value first", () => {
    const risks = [
      risk("r-001", "a-001", 9, "Medium", "Medium"), // 36
      risk("r-002", "a-001", 9, "High", "High"), // 81
      risk("r-003", "a-001", 9, "Low", "Low"), // 9 acceptable
      risk("r-004", "a-001", 9, "High", "Medium", { status: "Treated" }),
    ];
    expect(treatmentQueue(risks).map((r) => r.risk_id)).toEqual(["r-002", "r-001"]);
  });
});
