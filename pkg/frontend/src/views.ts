// Pure HTML-string renderers for the five views plus the banner. No DOM
// access here: main.ts assigns the output to innerHTML and delegates events
// by data-action attributes.

import {
  ASSET_VALUE_BANDS,
  PRODUCT_BANDS,
  buildRiskMatrix,
  cellKey,
  classificationColor,
  thresholdColumn,
  treatmentQueue,
} from "./matrix.js";
import { residualPreview, validateForm, type TreatmentFormState } from "./treatment.js";
import type { AppState } from "./state.js";
import type { Workspace } from "./api.js";
import type { RatingLabel, RiskRow } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBanner(state: AppState): string {
  if (!state.banner) return "";
  const reload =
    state.banner.kind === "stale"
      ? ' <button data-action="reload">Reload workspace</button>'
      : "";
  return `<div class="banner banner-${state.banner.kind}">${escapeHtml(state.banner.text)}${reload}</div>`;
}

export function renderNav(state: AppState): string {
  const tabs: [string, string][] = [
    ["matrix", "Matrix"],
    ["assets", "Assets"],
    ["queue", "Treatment queue"],
    ["soa", "SoA"],
    ["pdca", "PDCA"],
  ];
  const items = tabs
    .map(([view, label]) => {
      const active = state.view === view ? " class=\"active\"" : "";
      return `<button data-action="view" data-view="${view}"${active}>${label}</button>`;
    })
    .join("");
  return `<nav>${items}</nav>`;
}

export function renderMatrix(workspace: Workspace): string {
  const vm = buildRiskMatrix(
    workspace.risks,
    workspace.assets,
    workspace.register.acceptance_threshold,
  );
  const header = PRODUCT_BANDS.map((p) => `<th>T&times;V ${p}</th>`).join("");
  const rows = [...ASSET_VALUE_BANDS]
    .reverse()
    .map((assetValue) => {
      const crossing = thresholdColumn(assetValue, vm.threshold);
      const cells = PRODUCT_BANDS.map((product, index) => {
        const cell = vm.cells[cellKey(assetValue, product)];
        const chips = (cell?.entries ?? [])
          .map(
            (entry) =>
              `<span class="chip" data-risk="${entry.risk_id}" ` +
              `style="background:${classificationColor(entry.classification, entry.status)}">` +
              `${entry.risk_id}</span>`,
          )
          .join("");
        const above = index >= crossing ? " above-threshold" : "";
        return `<td class="cell${above}" data-cell="${cellKey(assetValue, product)}">${chips}</td>`;
      }).join("");
      return `<tr><th>value ${assetValue}</th>${cells}</tr>`;
    })
    .join("");
  return (
    `<h2>Risk matrix (threshold ${vm.threshold})</h2>` +
    `<table class="matrix"><thead><tr><th></th>${header}</tr></thead><tbody>${rows}</tbody></table>`
  );
}

const RATING_OPTIONS: RatingLabel[] = ["Low", "Medium", "High"];

function ratingSelect(name: string, selected: RatingLabel | null, allowEmpty = false): string {
  const blank = allowEmpty
    ? `<option value=""${selected === null ? " selected" : ""}>(keep)</option>`
    : "";
  const options = RATING_OPTIONS.map(
    (level) => `<option value="${level}"${selected === level ? " selected" : ""}>${level}</option>`,
  ).join("");
  return `<select name="${name}">${blank}${options}</select>`;
}

export function renderAssets(workspace: Workspace): string {
  const rows = workspace.assets
    .map(
      (asset) =>
        `<tr data-asset="${asset.asset_id}"><td>${asset.asset_id}</td>` +
        `<td>${escapeHtml(asset.name)}</td><td>${asset.category}</td>` +
        `<td>${ratingSelect("confidentiality", asset.confidentiality)}</td>` +
        `<td>${ratingSelect("integrity", asset.integrity)}</td>` +
        `<td>${ratingSelect("availability", asset.availability)}</td>` +
        `<td class="value">${asset.asset_value}</td>` +
        `<td><button data-action="rate" data-asset="${asset.asset_id}">Apply</button></td></tr>`,
    )
    .join("");
  return (
    "<h2>Assets</h2><table class=\"grid\"><thead><tr><th>id</th><th>name</th><th>category</th>" +
    "<th>C</th><th>I</th><th>A</th><th>value</th><th></th></tr></thead>" +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderTreatmentForm(
  form: TreatmentFormState,
  risk: RiskRow,
  assetValue: number,
): string {
  const problems = validateForm(form, risk);
  const preview = residualPreview(form, risk, assetValue);
  const methods = ["acceptance", "avoidance", "limitation", "transfer"]
    .map(
      (m) => `<option value="${m}"${form.method === m ? " selected" : ""}>${m}</option>`,
    )
    .join("");
  const controls = form.availableControls
    .map((option) => {
      const checked = form.selectedControls.includes(option.question_id) ? " checked" : "";
      return (
        `<label><input type="checkbox" name="control" value="${option.question_id}"${checked}>` +
        `${option.question_id}</label>`
      );
    })
    .join(" ");
  const limitationFields =
    form.method === "limitation"
      ? `<div class="field">controls: ${controls}</div>` +
        `<div class="field">residual threat ${ratingSelect("residual_threat", form.residualThreat, true)}` +
        ` residual vulnerability ${ratingSelect("residual_vuln", form.residualVuln, true)}</div>`
      : "";
  const transferField =
    form.method === "transfer"
      ? `<div class="field">transferee <input name="transferee" value="${escapeHtml(form.transferee)}"></div>`
      : "";
  const problemList = problems.map((p) => `<li>${escapeHtml(p)}</li>`).join("");
  return (
    `<form class="treatment" data-risk="${risk.risk_id}">` +
    `<div class="field">method <select name="method">${methods}</select></div>` +
    `<div class="field">justification <input name="justification" value="${escapeHtml(form.justification)}"></div>` +
    limitationFields +
    transferField +
    `<div class="preview">residual preview: <strong>${preview}</strong> (server value wins)</div>` +
    (problemList ? `<ul class="problems">${problemList}</ul>` : "") +
    `<button data-action="submit-treatment" data-risk="${risk.risk_id}"` +
    `${problems.length ? " disabled" : ""}>Record decision</button>` +
    "</form>"
  );
}

export function renderQueue(workspace: Workspace, state: AppState): string {
  const queue = treatmentQueue(workspace.risks);
  const counter = `<p class="counter">${queue.length} risk(s) awaiting a decision</p>`;
  const items = queue
    .map((risk) => {
      const open = state.form?.riskId === risk.risk_id;
      const assetValue =
        workspace.assets.find((a) => a.asset_id === risk.asset_id)?.asset_value ?? 0;
      const body = open
        ? renderTreatmentForm(state.form!, risk, assetValue)
        : `<button data-action="open-form" data-risk="${risk.risk_id}">Treat</button>`;
      return (
        `<li data-risk="${risk.risk_id}"><strong>${risk.risk_id}</strong> ` +
        `${risk.threat_id} / ${risk.vuln_id} on ${risk.asset_id}: value ${risk.risk_value}` +
        `<div>${body}</div></li>`
      );
    })
    .join("");
  return `<h2>Treatment queue</h2>${counter}<ol class="queue">${items}</ol>`;
}

export function renderSoa(workspace: Workspace, state: AppState): string {
  const stale = state.soaStale
    ? '<p class="stale">decisions changed since last generation; regenerate to refresh ' +
      '<button data-action="generate-soa">Generate</button></p>'
    : `<p>generated ${workspace.soa.generated_at} at revision ${workspace.soa.register_revision} ` +
      '<button data-action="generate-soa">Regenerate</button></p>';
  const domainNames = new Map<number, string>(
    workspace.domains.map((d) => [d.domain_no, d.name]),
  );
  const rows = workspace.soa.entries
    .map(
      (entry) =>
        `<tr class="${entry.included ? "included" : "excluded"}">` +
        `<td>${entry.question_id}</td>` +
        `<td>${entry.domain_no} ${escapeHtml(domainNames.get(entry.domain_no) ?? "")}</td>` +
        `<td>${entry.included ? "yes" : "no"}</td>` +
        `<td>${escapeHtml(entry.justification)}</td>` +
        `<td>${entry.linked_risk_ids.join(", ")}</td></tr>`,
    )
    .join("");
  return (
    `<h2>Statement of Applicability</h2>${stale}` +
    "<table class=\"grid\"><thead><tr><th>control</th><th>domain</th><th>included</th>" +
    `<th>justification</th><th>risks</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderPdca(workspace: Workspace): string {
  const pdca = workspace.pdca;
  const items = pdca.checklist_items
    .map(
      (item) =>
        `<li class="${item.satisfied ? "done" : "missing"}">` +
        `[${item.satisfied ? "x" : " "}] ${escapeHtml(item.description)}` +
        (item.detail && !item.satisfied ? ` <em>${escapeHtml(item.detail)}</em>` : "") +
        "</li>",
    )
    .join("");
  const history = pdca.history
    .map((h) => `<li>${h.timestamp} &rarr; ${h.phase}: ${escapeHtml(h.note)}</li>`)
    .join("");
  return (
    `<h2>PDCA: ${pdca.phase} (iteration ${pdca.iteration})</h2>` +
    `<ul class="checklist">${items}</ul>` +
    `<div class="field"><input name="advance-note" placeholder="transition note">` +
    `<button data-action="advance" ${pdca.can_advance ? "" : "disabled"}>Advance</button></div>` +
    (history ? `<h3>History</h3><ul class="history">${history}</ul>` : "")
  );
}

export function renderApp(state: AppState): string {
  if (!state.workspace) {
    return `<main>${renderBanner(state)}<p>loading workspace&hellip;</p></main>`;
  }
  const body = {
    matrix: () => renderMatrix(state.workspace!),
    assets: () => renderAssets(state.workspace!),
    queue: () => renderQueue(state.workspace!, state),
    soa: () => renderSoa(state.workspace!, state),
    pdca: () => renderPdca(state.workspace!),
  }[state.view]();
  return `<header><h1>lanrisk workbench</h1>${renderNav(state)}</header>` +
    `${renderBanner(state)}<main>${body}</main>`;
}
