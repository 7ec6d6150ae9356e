"""Plan-Do-Check-Act lifecycle enforcement.

A register can only move one step around the cycle, and only when the
current phase's checklist is fully satisfied:

* Plan: scope and policy set, at least one asset rated, no open
  above-threshold risk, statement of applicability generated at the
  current revision.
* Do: implementation evidence for every control included in the statement
  of applicability.
* Check: at least one review record, and together the reviews cover every
  implemented control.
* Act: every review finding carries a corrective action or deferral note.

Completing Act re-enters Plan with the iteration counter incremented and
assessment mutations re-enabled; working evidence from the finished cycle
is cleared so the new cycle gates on fresh records (old transitions stay
in the append-only history).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .catalog import Catalog
from .errors import ControlNotIncluded, EmptyNote, PhaseIncomplete, UnknownFinding, WrongPhase
from .model import (
    AssessmentRegister,
    CorrectiveAction,
    HistoryEntry,
    ImplementationEvidence,
    PdcaPhase,
    PdcaState,
    ReviewFinding,
    ReviewRecord,
    format_timestamp,
    next_phase,
    next_sequential_id,
)
from .register import bump_revision, require_phase
from .treatment import coverage_report, included_controls


@dataclass(frozen=True)
class ChecklistItem:
    item_id: str
    description: str
    satisfied: bool
    detail: str = ""


def _implemented_controls(register: AssessmentRegister) -> set[str]:
    return {e.question_id for e in register.pdca.implementations if e.implemented}


def required_artifacts(
    register: AssessmentRegister, catalog: Catalog, phase: PdcaPhase | None = None
) -> list[ChecklistItem]:
    """Concrete checklist for a phase (default: the register's current one)."""
    phase = phase or register.pdca.phase

    if phase is PdcaPhase.PLAN:
        pending = coverage_report(register)
        marker = register.pdca.soa_generated_at_revision
        return [
            ChecklistItem("scope-set", "scope statement set", bool(register.scope_statement.strip())),
            ChecklistItem("policy-set", "policy statement set", bool(register.policy_statement.strip())),
            ChecklistItem("asset-rated", "at least one asset rated", bool(register.assets)),
            ChecklistItem(
                "risks-decided",
                "zero open above-threshold risks",
                not pending,
                detail=", ".join(entry.risk_id for entry in pending),
            ),
            ChecklistItem(
                "soa-current",
                "statement of applicability generated at current revision",
                marker == register.revision,
                detail=f"generated at revision {marker}, register at {register.revision}"
                if marker is not None
                else "never generated",
            ),
        ]

    if phase is PdcaPhase.DO:
        evidence = {e.question_id: e for e in register.pdca.implementations}
        items = []
        for question_id in sorted(included_controls(register)):
            entry = evidence.get(question_id)
            items.append(
                ChecklistItem(
                    f"evidence:{question_id}",
                    f"control {question_id} implemented",
                    entry is not None and entry.implemented,
                    detail=entry.note if entry else "no evidence recorded",
                )
            )
        return items

    if phase is PdcaPhase.CHECK:
        implemented = _implemented_controls(register)
        covered: set[str] = set()
        for review in register.pdca.reviews:
            covered.update(review.controls_covered)
        uncovered = sorted(implemented - covered)
        return [
            ChecklistItem(
                "review-coverage",
                "at least one review record covering all implemented controls",
                bool(register.pdca.reviews) and not uncovered,
                detail="uncovered: " + ", ".join(uncovered) if uncovered else "",
            )
        ]

    resolved = {a.finding_id for a in register.pdca.actions}
    items = []
    for review in register.pdca.reviews:
        for finding in review.findings:
            items.append(
                ChecklistItem(
                    f"action:{finding.finding_id}",
                    f"finding {finding.finding_id} has a corrective action or deferral note",
                    finding.finding_id in resolved,
                    detail=finding.text,
                )
            )
    return items


def can_advance(
    register: AssessmentRegister, catalog: Catalog
) -> tuple[bool, list[ChecklistItem]]:
    """Whether the cycle may move one step; returns the unmet items if not."""
    missing = [item for item in required_artifacts(register, catalog) if not item.satisfied]
    return (not missing, missing)


def advance(
    register: AssessmentRegister, catalog: Catalog, note: str, now: datetime
) -> PdcaState:
    """Move one step in the cyclic order; Act back to Plan starts a new
    iteration and re-opens assessment mutations."""
    if not note.strip():
        raise EmptyNote("advance requires a non-empty note")
    ok, missing = can_advance(register, catalog)
    if not ok:
        raise PhaseIncomplete(
            f"{register.pdca.phase.value} checklist incomplete: "
            + "; ".join(f"{item.item_id} ({item.description})" for item in missing)
        )
    state = register.pdca
    target = next_phase(state.phase)
    state.phase = target
    if target is PdcaPhase.PLAN:
        state.iteration += 1
        state.soa_generated_at_revision = None
        state.implementations.clear()
        state.reviews.clear()
        state.actions.clear()
    state.history.append(HistoryEntry(target, format_timestamp(now), note))
    bump_revision(register)
    return state


# -- evidence recording --------------------------------------------------------

def record_implementation(
    register: AssessmentRegister,
    question_id: str,
    implemented: bool,
    note: str,
    now: datetime,
) -> ImplementationEvidence:
    """Do-phase record that a control from the statement of applicability
    was (or was not) put in place. Re-recording a control replaces its entry."""
    require_phase(register, PdcaPhase.DO)
    if question_id not in included_controls(register):
        raise ControlNotIncluded(
            f"control {question_id} is not included in the statement of applicability"
        )
    if not note.strip():
        raise EmptyNote("implementation evidence requires a note")
    evidence = ImplementationEvidence(
        question_id=question_id,
        implemented=implemented,
        note=note,
        recorded_at=format_timestamp(now),
    )
    register.pdca.implementations = [
        e for e in register.pdca.implementations if e.question_id != question_id
    ]
    register.pdca.implementations.append(evidence)
    bump_revision(register)
    return evidence


def record_review(
    register: AssessmentRegister,
    controls_covered: list[str],
    findings: list[str],
    note: str,
    now: datetime,
) -> ReviewRecord:
    """Check-phase inspection; findings become trackable items for Act."""
    require_phase(register, PdcaPhase.CHECK)
    if not note.strip():
        raise EmptyNote("review requires a note")
    evidenced = {e.question_id for e in register.pdca.implementations}
    for question_id in controls_covered:
        if question_id not in evidenced:
            raise ControlNotIncluded(
                f"control {question_id} has no implementation evidence to review"
            )
    existing_findings = [
        f.finding_id for review in register.pdca.reviews for f in review.findings
    ]
    review_findings = []
    for text in findings:
        finding_id = next_sequential_id("f", existing_findings)
        existing_findings.append(finding_id)
        review_findings.append(ReviewFinding(finding_id=finding_id, text=text))
    review = ReviewRecord(
        review_id=next_sequential_id("rev", [r.review_id for r in register.pdca.reviews]),
        controls_covered=tuple(controls_covered),
        findings=review_findings,
        note=note,
        recorded_at=format_timestamp(now),
    )
    register.pdca.reviews.append(review)
    bump_revision(register)
    return review


def record_corrective_action(
    register: AssessmentRegister,
    finding_id: str,
    note: str,
    deferred: bool,
    now: datetime,
) -> CorrectiveAction:
    """Act-phase resolution of a review finding; re-recording replaces it."""
    require_phase(register, PdcaPhase.ACT)
    known = {f.finding_id for review in register.pdca.reviews for f in review.findings}
    if finding_id not in known:
        raise UnknownFinding(f"unknown finding: {finding_id!r}")
    if not note.strip():
        raise EmptyNote("corrective action requires a note")
    action = CorrectiveAction(
        finding_id=finding_id,
        note=note,
        deferred=deferred,
        recorded_at=format_timestamp(now),
    )
    register.pdca.actions = [a for a in register.pdca.actions if a.finding_id != finding_id]
    register.pdca.actions.append(action)
    bump_revision(register)
    return action
