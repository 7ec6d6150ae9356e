"""Domain records held by an assessment register.

The register is the single mutable value in the engine: everything in it is
either a primary field (ratings, prose, status) or a derived field
(asset values, risk values, classifications, residual risk) that must equal
its recomputation from primaries at every observable point.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .scoring import AcceptanceThreshold, AssetValue, Classification, Rating, RiskValue
from .catalog import AssetCategory
from .errors import UnknownAsset, UnknownRisk

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def format_timestamp(moment: datetime) -> str:
    """UTC second-resolution ISO timestamp, the only form stored in files."""
    if moment.tzinfo is not None:
        moment = moment.astimezone(timezone.utc)
    return moment.strftime(TIMESTAMP_FORMAT)


def parse_timestamp(text: str) -> datetime:
    return datetime.strptime(text, TIMESTAMP_FORMAT).replace(tzinfo=timezone.utc)


class RiskStatus(enum.Enum):
    OPEN = "Open"
    TREATED = "Treated"
    RETIRED = "Retired"


class TreatmentMethod(enum.Enum):
    ACCEPTANCE = "Acceptance"
    AVOIDANCE = "Avoidance"
    LIMITATION = "Limitation"
    TRANSFER = "Transfer"


class PdcaPhase(enum.Enum):
    PLAN = "Plan"
    DO = "Do"
    CHECK = "Check"
    ACT = "Act"


PHASE_ORDER = (PdcaPhase.PLAN, PdcaPhase.DO, PdcaPhase.CHECK, PdcaPhase.ACT)


def next_phase(phase: PdcaPhase) -> PdcaPhase:
    return PHASE_ORDER[(PHASE_ORDER.index(phase) + 1) % len(PHASE_ORDER)]


@dataclass
class AssetProfile:
    asset_id: str
    name: str
    category: AssetCategory
    confidentiality: Rating
    integrity: Rating
    availability: Rating
    asset_value: AssetValue  # derived: C + I + A


@dataclass
class RiskRecord:
    risk_id: str
    asset_id: str
    threat_id: str
    threat_rating: Rating
    vuln_id: str
    vuln_rating: Rating
    risk_value: RiskValue  # derived: asset value x threat x vulnerability
    classification: Classification  # derived from risk_value vs threshold
    status: RiskStatus = RiskStatus.OPEN


@dataclass
class TreatmentDecision:
    decision_id: str
    risk_id: str
    method: TreatmentMethod
    justification: str
    selected_controls: tuple[str, ...] = ()
    residual_threat: Rating | None = None
    residual_vuln: Rating | None = None
    transferee: str | None = None
    residual_risk: int = 0  # derived per method rule; 0 only for avoidance
    decided_at: str = ""


@dataclass
class ImplementationEvidence:
    """Do-phase record that an included control was put in place."""

    question_id: str
    implemented: bool
    note: str
    recorded_at: str


@dataclass
class ReviewFinding:
    finding_id: str
    text: str


@dataclass
class ReviewRecord:
    """Check-phase inspection covering a set of implemented controls."""

    review_id: str
    controls_covered: tuple[str, ...]
    findings: list[ReviewFinding]
    note: str
    recorded_at: str


@dataclass
class CorrectiveAction:
    """Act-phase resolution (or explicit deferral) of a review finding."""

    finding_id: str
    note: str
    deferred: bool
    recorded_at: str


@dataclass
class HistoryEntry:
    phase: PdcaPhase  # the phase entered
    timestamp: str
    note: str


@dataclass
class PdcaState:
    phase: PdcaPhase = PdcaPhase.PLAN
    iteration: int = 1
    soa_generated_at_revision: int | None = None
    implementations: list[ImplementationEvidence] = field(default_factory=list)
    reviews: list[ReviewRecord] = field(default_factory=list)
    actions: list[CorrectiveAction] = field(default_factory=list)
    history: list[HistoryEntry] = field(default_factory=list)


@dataclass
class AssessmentRegister:
    scope_statement: str
    policy_statement: str
    acceptance_threshold: AcceptanceThreshold
    catalog_version: str
    assets: list[AssetProfile] = field(default_factory=list)
    risks: list[RiskRecord] = field(default_factory=list)
    treatments: list[TreatmentDecision] = field(default_factory=list)
    pdca: PdcaState = field(default_factory=PdcaState)
    revision: int = 0

    def asset(self, asset_id: str) -> AssetProfile:
        for asset in self.assets:
            if asset.asset_id == asset_id:
                return asset
        raise UnknownAsset(f"unknown asset: {asset_id!r}")

    def risk(self, risk_id: str) -> RiskRecord:
        for risk in self.risks:
            if risk.risk_id == risk_id:
                return risk
        raise UnknownRisk(f"unknown risk: {risk_id!r}")

    def decisions_for(self, risk_id: str) -> list[TreatmentDecision]:
        return [d for d in self.treatments if d.risk_id == risk_id]


_ID_SUFFIX = re.compile(r"-(\d+)$")


def next_sequential_id(prefix: str, existing: list[str]) -> str:
    """Next ``<prefix>-NNN`` id; counters derive from the largest existing
    suffix so they survive serialization without extra bookkeeping fields."""
    highest = 0
    for item in existing:
        match = _ID_SUFFIX.search(item)
        if match:
            highest = max(highest, int(match.group(1)))
    return f"{prefix}-{highest + 1:03d}"
