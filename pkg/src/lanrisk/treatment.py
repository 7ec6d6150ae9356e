"""Treatment decisions, residual risk, and the statement of applicability.

Residual quantification per method: acceptance keeps the original value,
avoidance zeroes it and retires the risk, limitation re-scores with the
assessor's residual ratings, transfer keeps the value (insurance shifts
cost, not likelihood) and flags it transferred via the method itself.
Limitation decisions must cite controls mapped to the risk's
threat/vulnerability in the catalog; those citations drive the statement
of applicability.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime

from . import scoring
from .catalog import Catalog, lookup_mitigations
from .errors import (
    AlreadyDecided,
    CatalogMismatch,
    ControlNotApplicable,
    EmptyJustification,
    InvalidTreatmentOptions,
    MissingControls,
    MissingTransferee,
    ResidualExceedsOriginal,
)
from .model import (
    AssessmentRegister,
    PdcaPhase,
    RiskRecord,
    RiskStatus,
    TreatmentDecision,
    TreatmentMethod,
    format_timestamp,
    next_sequential_id,
)
from .register import bump_revision, require_phase, residual_of
from .scoring import Rating


def apply_treatment(
    register: AssessmentRegister,
    catalog: Catalog,
    risk_id: str,
    method: TreatmentMethod,
    justification: str,
    *,
    controls: list[str] | None = None,
    residual_threat: Rating | None = None,
    residual_vuln: Rating | None = None,
    transferee: str | None = None,
    now: datetime,
) -> TreatmentDecision:
    """Record a treatment decision for an open risk (Plan phase only)."""
    risk = register.risk(risk_id)
    require_phase(register, PdcaPhase.PLAN)
    if risk.status is not RiskStatus.OPEN:
        raise AlreadyDecided(f"risk {risk_id} is {risk.status.value}, not Open")
    if not justification.strip():
        raise EmptyJustification("treatment justification must not be empty")

    controls = list(controls or [])
    if method is TreatmentMethod.LIMITATION:
        if not controls:
            raise MissingControls("limitation requires at least one selected control")
        applicable = {
            control.question_id
            for control, _ in lookup_mitigations(catalog, risk.threat_id, risk.vuln_id)
        }
        for question_id in controls:
            if question_id not in applicable:
                raise ControlNotApplicable(
                    f"control {question_id} is not mapped to ({risk.threat_id}, {risk.vuln_id})"
                )
        if residual_threat is not None and residual_threat.numeric > risk.threat_rating.numeric:
            raise ResidualExceedsOriginal(
                f"residual threat {residual_threat.label} exceeds original {risk.threat_rating.label}"
            )
        if residual_vuln is not None and residual_vuln.numeric > risk.vuln_rating.numeric:
            raise ResidualExceedsOriginal(
                f"residual vulnerability {residual_vuln.label} exceeds original {risk.vuln_rating.label}"
            )
    else:
        if controls:
            raise InvalidTreatmentOptions(f"{method.value} does not take selected controls")
        if residual_threat is not None or residual_vuln is not None:
            raise InvalidTreatmentOptions(f"{method.value} does not take residual ratings")

    if method is TreatmentMethod.TRANSFER:
        if not (transferee or "").strip():
            raise MissingTransferee("transfer requires the receiving party")
    elif transferee is not None:
        raise InvalidTreatmentOptions(f"{method.value} does not take a transferee")

    decision = TreatmentDecision(
        decision_id=next_sequential_id("d", [d.decision_id for d in register.treatments]),
        risk_id=risk_id,
        method=method,
        justification=justification,
        selected_controls=tuple(controls),
        residual_threat=residual_threat,
        residual_vuln=residual_vuln,
        transferee=transferee,
        decided_at=format_timestamp(now),
    )
    decision.residual_risk = residual_of(decision, risk, register.asset(risk.asset_id))

    if method is TreatmentMethod.AVOIDANCE:
        risk.status = RiskStatus.RETIRED
    else:
        risk.status = RiskStatus.TREATED
    register.treatments.append(decision)
    bump_revision(register)
    return decision


def residual_risk(decision: TreatmentDecision, original: RiskRecord, asset_value: scoring.AssetValue) -> int:
    """Pure residual computation for a decision against its original risk."""
    if decision.method is TreatmentMethod.AVOIDANCE:
        return 0
    if decision.method is TreatmentMethod.LIMITATION:
        threat = decision.residual_threat or original.threat_rating
        vuln = decision.residual_vuln or original.vuln_rating
        return scoring.risk_value(asset_value, threat, vuln).value
    return original.risk_value.value


# -- coverage ----------------------------------------------------------------

@dataclass(frozen=True)
class CoverageEntry:
    risk_id: str
    asset_id: str
    threat_id: str
    vuln_id: str
    risk_value: int


def coverage_report(register: AssessmentRegister) -> list[CoverageEntry]:
    """Every above-threshold risk still awaiting a decision, highest first.
    An empty report means treatment is complete."""
    pending = [
        risk
        for risk in register.risks
        if risk.status is RiskStatus.OPEN
        and risk.classification is scoring.Classification.REQUIRES_TREATMENT
    ]
    return [
        CoverageEntry(r.risk_id, r.asset_id, r.threat_id, r.vuln_id, r.risk_value.value)
        for r in scoring.risk_matrix(pending)
    ]


# -- statement of applicability -----------------------------------------------

EXCLUSION_REASON = "no mapped risk in scope"


def _linked_risks(register: AssessmentRegister) -> dict[str, set[str]]:
    """question_id -> risk ids, over limitation decisions on non-retired risks."""
    linked: dict[str, set[str]] = {}
    for decision in register.treatments:
        if decision.method is not TreatmentMethod.LIMITATION:
            continue
        risk = register.risk(decision.risk_id)
        if risk.status is RiskStatus.RETIRED:
            continue
        for question_id in decision.selected_controls:
            linked.setdefault(question_id, set()).add(risk.risk_id)
    return linked


def included_controls(register: AssessmentRegister) -> set[str]:
    """Controls the statement of applicability would include right now."""
    return set(_linked_risks(register))


@dataclass(frozen=True)
class SoAEntry:
    question_id: str
    domain_no: int
    included: bool
    justification: str
    linked_risk_ids: tuple[str, ...]


@dataclass(frozen=True)
class StatementOfApplicability:
    generated_at: str
    register_revision: int
    catalog_version: str
    entries: tuple[SoAEntry, ...]


def generate_soa(
    register: AssessmentRegister,
    catalog: Catalog,
    now: datetime,
    exclusion_overrides: dict[str, str] | None = None,
) -> StatementOfApplicability:
    """One entry per catalog control. A control is included iff it is cited
    by at least one limitation decision on a non-retired risk; everything
    else is excluded with a boilerplate (or overridden) reason. Pure: the
    register is not touched."""
    if register.catalog_version != catalog.catalog_version:
        raise CatalogMismatch(
            f"register was built against catalog {register.catalog_version!r}, "
            f"supplied catalog is {catalog.catalog_version!r}"
        )
    overrides = exclusion_overrides or {}
    linked = _linked_risks(register)

    entries = []
    for control in catalog.controls:
        risk_ids = tuple(sorted(linked.get(control.question_id, ())))
        if risk_ids:
            names = []
            for risk_id in risk_ids:
                threat = catalog.threat(register.risk(risk_id).threat_id)
                names.append(f"{risk_id} ({threat.name})")
            justification = "limits risk(s) " + "; ".join(names)
        else:
            justification = overrides.get(control.question_id, EXCLUSION_REASON)
        entries.append(
            SoAEntry(
                question_id=control.question_id,
                domain_no=control.domain_no,
                included=bool(risk_ids),
                justification=justification,
                linked_risk_ids=risk_ids,
            )
        )
    return StatementOfApplicability(
        generated_at=format_timestamp(now),
        register_revision=register.revision,
        catalog_version=catalog.catalog_version,
        entries=tuple(entries),
    )


def soa_to_dict(soa: StatementOfApplicability) -> dict:
    return {
        "format": "isms-soa/1",
        "generated_at": soa.generated_at,
        "register_revision": soa.register_revision,
        "catalog_version": soa.catalog_version,
        "entries": [
            {
                "question_id": e.question_id,
                "domain_no": e.domain_no,
                "included": e.included,
                "justification": e.justification,
                "linked_risk_ids": list(e.linked_risk_ids),
            }
            for e in soa.entries
        ],
    }


def soa_to_csv(soa: StatementOfApplicability) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["question_id", "domain_no", "included", "justification", "linked_risks"])
    for entry in soa.entries:
        writer.writerow(
            [
                entry.question_id,
                entry.domain_no,
                "true" if entry.included else "false",
                entry.justification,
                ";".join(entry.linked_risk_ids),
            ]
        )
    return buffer.getvalue()


def soa_to_markdown(soa: StatementOfApplicability, catalog: Catalog) -> str:
    """Markdown report grouped by domain, in domain-number order."""
    lines = [
        "# Statement of Applicability",
        "",
        f"- generated: {soa.generated_at}",
        f"- register revision: {soa.register_revision}",
        f"- catalog: {soa.catalog_version}",
        "",
    ]
    by_domain: dict[int, list[SoAEntry]] = {}
    for entry in soa.entries:
        by_domain.setdefault(entry.domain_no, []).append(entry)
    for domain in catalog.domains:
        entries = by_domain.get(domain.domain_no)
        if not entries:
            continue
        lines.append(f"## {domain.domain_no}. {domain.name}")
        lines.append("")
        lines.append("| control | included | justification | linked risks |")
        lines.append("| --- | --- | --- | --- |")
        for entry in entries:
            linked = ", ".join(entry.linked_risk_ids) or "-"
            justification = entry.justification.replace("|", "\\|")
            included = "yes" if entry.included else "no"
            lines.append(f"| {entry.question_id} | {included} | {justification} | {linked} |")
        lines.append("")
    return "\n".join(lines)
