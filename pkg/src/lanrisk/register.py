"""Assessment register: scope, policy, rated assets, instantiated risks.

Mutations follow a strict discipline: validate everything first, then apply,
so a failed operation leaves the register bit-identical. Every successful
mutation increments ``revision`` by exactly one. Assessment mutations are
only legal while the lifecycle is in the Plan phase.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import IO, Union

from . import scoring
from .catalog import AssetCategory, Catalog
from .errors import (
    AlreadyOpen,
    CatalogMismatch,
    CategoryMismatch,
    DanglingReference,
    DependentRisks,
    DuplicateName,
    DuplicateRisk,
    EmptyName,
    EmptyPolicy,
    EmptyScope,
    MalformedDocument,
    SchemaViolation,
    TamperedDerivedField,
    WrongPhase,
)
from .model import (
    AssessmentRegister,
    AssetProfile,
    CorrectiveAction,
    HistoryEntry,
    ImplementationEvidence,
    PdcaPhase,
    PdcaState,
    ReviewFinding,
    ReviewRecord,
    RiskRecord,
    RiskStatus,
    TreatmentDecision,
    TreatmentMethod,
    next_sequential_id,
)
from .scoring import AcceptanceThreshold, Classification, Rating

FORMAT = "isms-register/1"


def bump_revision(register: AssessmentRegister) -> None:
    register.revision += 1


def require_phase(register: AssessmentRegister, phase: PdcaPhase) -> None:
    if register.pdca.phase is not phase:
        raise WrongPhase(
            f"operation requires the {phase.value} phase, register is in {register.pdca.phase.value}"
        )


def _coerce_threshold(threshold: Union[AcceptanceThreshold, int]) -> AcceptanceThreshold:
    if isinstance(threshold, AcceptanceThreshold):
        return threshold
    return AcceptanceThreshold(threshold)


# -- lifecycle of the register value ----------------------------------------

def create_register(
    scope: str,
    policy: str,
    threshold: Union[AcceptanceThreshold, int],
    catalog: Catalog,
) -> AssessmentRegister:
    """Empty register at revision 0, lifecycle at (Plan, iteration 1)."""
    if not scope.strip():
        raise EmptyScope("scope statement must not be empty")
    if not policy.strip():
        raise EmptyPolicy("policy statement must not be empty")
    return AssessmentRegister(
        scope_statement=scope,
        policy_statement=policy,
        acceptance_threshold=_coerce_threshold(threshold),
        catalog_version=catalog.catalog_version,
    )


def set_scope(register: AssessmentRegister, scope: str) -> None:
    if not scope.strip():
        raise EmptyScope("scope statement must not be empty")
    require_phase(register, PdcaPhase.PLAN)
    register.scope_statement = scope
    bump_revision(register)


def set_policy(register: AssessmentRegister, policy: str) -> None:
    if not policy.strip():
        raise EmptyPolicy("policy statement must not be empty")
    require_phase(register, PdcaPhase.PLAN)
    register.policy_statement = policy
    bump_revision(register)


def set_threshold(register: AssessmentRegister, threshold: Union[AcceptanceThreshold, int]) -> None:
    """Change the acceptance level and reclassify every risk against it."""
    threshold = _coerce_threshold(threshold)
    require_phase(register, PdcaPhase.PLAN)
    register.acceptance_threshold = threshold
    _derive_all(register)
    bump_revision(register)


# -- assets ------------------------------------------------------------------

def add_asset(
    register: AssessmentRegister,
    name: str,
    category: Union[AssetCategory, str],
    confidentiality: Rating,
    integrity: Rating,
    availability: Rating,
) -> str:
    if not name.strip():
        raise EmptyName("asset name must not be empty")
    if isinstance(category, str):
        category = AssetCategory.parse(category)
    require_phase(register, PdcaPhase.PLAN)
    if any(a.name == name for a in register.assets):
        raise DuplicateName(f"asset named {name!r} already exists")
    asset_id = next_sequential_id("a", [a.asset_id for a in register.assets])
    register.assets.append(
        AssetProfile(
            asset_id=asset_id,
            name=name,
            category=category,
            confidentiality=confidentiality,
            integrity=integrity,
            availability=availability,
            asset_value=scoring.asset_value(confidentiality, integrity, availability),
        )
    )
    bump_revision(register)
    return asset_id


def rate_asset(
    register: AssessmentRegister,
    asset_id: str,
    confidentiality: Rating,
    integrity: Rating,
    availability: Rating,
) -> AssetProfile:
    """Re-rate an asset; every dependent risk and decision is rescored."""
    asset = register.asset(asset_id)
    require_phase(register, PdcaPhase.PLAN)
    asset.confidentiality = confidentiality
    asset.integrity = integrity
    asset.availability = availability
    _derive_all(register)
    bump_revision(register)
    return asset


def delete_asset(register: AssessmentRegister, asset_id: str) -> None:
    """Refused while any risk still references the asset (no cascades)."""
    asset = register.asset(asset_id)
    require_phase(register, PdcaPhase.PLAN)
    dependents = [r.risk_id for r in register.risks if r.asset_id == asset_id]
    if dependents:
        raise DependentRisks(
            f"asset {asset_id} is referenced by risk(s) {', '.join(dependents)}"
        )
    register.assets.remove(asset)
    bump_revision(register)


# -- risks ---------------------------------------------------------------------

def instantiate_risk(
    register: AssessmentRegister,
    catalog: Catalog,
    asset_id: str,
    threat_id: str,
    threat_rating: Rating,
    vuln_id: str,
    vuln_rating: Rating,
) -> RiskRecord:
    asset = register.asset(asset_id)
    threat = catalog.threat(threat_id)
    if threat.asset_category is not asset.category:
        raise CategoryMismatch(
            f"threat {threat.threat_id} targets {threat.asset_category.value}, "
            f"asset {asset.asset_id} is {asset.category.value}"
        )
    catalog.vulnerability(threat_id, vuln_id)  # raises UnknownVulnerability
    require_phase(register, PdcaPhase.PLAN)
    for risk in register.risks:
        if (risk.asset_id, risk.threat_id, risk.vuln_id) == (asset_id, threat_id, vuln_id):
            raise DuplicateRisk(
                f"risk for ({asset_id}, {threat_id}, {vuln_id}) already registered as {risk.risk_id}"
            )
    value = scoring.risk_value(asset.asset_value, threat_rating, vuln_rating)
    record = RiskRecord(
        risk_id=next_sequential_id("r", [r.risk_id for r in register.risks]),
        asset_id=asset_id,
        threat_id=threat_id,
        threat_rating=threat_rating,
        vuln_id=vuln_id,
        vuln_rating=vuln_rating,
        risk_value=value,
        classification=scoring.classify(value, register.acceptance_threshold),
    )
    register.risks.append(record)
    bump_revision(register)
    return record


def reopen_risk(register: AssessmentRegister, risk_id: str) -> RiskRecord:
    """Put a decided risk back on the table; prior decisions stay in history."""
    risk = register.risk(risk_id)
    require_phase(register, PdcaPhase.PLAN)
    if risk.status is RiskStatus.OPEN:
        raise AlreadyOpen(f"risk {risk_id} is already open")
    risk.status = RiskStatus.OPEN
    bump_revision(register)
    return risk


# -- derived-field maintenance ---------------------------------------------


def residual_of(decision: TreatmentDecision, risk: RiskRecord, asset: AssetProfile) -> int:
    """Residual risk per method rule: acceptance and transfer keep the
    original value, avoidance zeroes it, limitation re-scores with the
    residual ratings."""
    if decision.method is TreatmentMethod.AVOIDANCE:
        return 0
    if decision.method is TreatmentMethod.LIMITATION:
        threat = decision.residual_threat or risk.threat_rating
        vuln = decision.residual_vuln or risk.vuln_rating
        return scoring.risk_value(asset.asset_value, threat, vuln).value
    return risk.risk_value.value


def _derive_all(register: AssessmentRegister) -> None:
    for asset in register.assets:
        asset.asset_value = scoring.asset_value(
            asset.confidentiality, asset.integrity, asset.availability
        )
    for risk in register.risks:
        asset = register.asset(risk.asset_id)
        risk.risk_value = scoring.risk_value(
            asset.asset_value, risk.threat_rating, risk.vuln_rating
        )
        risk.classification = scoring.classify(risk.risk_value, register.acceptance_threshold)
    for decision in register.treatments:
        risk = register.risk(decision.risk_id)
        asset = register.asset(risk.asset_id)
        decision.residual_risk = residual_of(decision, risk, asset)


def recompute_all(register: AssessmentRegister) -> AssessmentRegister:
    """Recompute every derived field from primary fields. Idempotent, does
    not count as a mutation (a consistent register is left byte-identical)."""
    _derive_all(register)
    return register


# -- evidence recording (lifecycle bookkeeping) ------------------------------

def record_soa_generated(register: AssessmentRegister) -> None:
    """Mark that the statement of applicability was produced for the current
    register content. The marker records the post-mutation revision; any
    later mutation makes it stale."""
    bump_revision(register)
    register.pdca.soa_generated_at_revision = register.revision


# -- persistence --------------------------------------------------------------

def register_to_dict(register: AssessmentRegister) -> dict:
    return {
        "format": FORMAT,
        "scope_statement": register.scope_statement,
        "policy_statement": register.policy_statement,
        "acceptance_threshold": register.acceptance_threshold.threshold,
        "catalog_version": register.catalog_version,
        "assets": [
            {
                "asset_id": a.asset_id,
                "name": a.name,
                "category": a.category.value,
                "confidentiality": a.confidentiality.label,
                "integrity": a.integrity.label,
                "availability": a.availability.label,
                "asset_value": a.asset_value.value,
            }
            for a in register.assets
        ],
        "risks": [
            {
                "risk_id": r.risk_id,
                "asset_id": r.asset_id,
                "threat_id": r.threat_id,
                "threat_rating": r.threat_rating.label,
                "vuln_id": r.vuln_id,
                "vuln_rating": r.vuln_rating.label,
                "risk_value": r.risk_value.value,
                "classification": r.classification.value,
                "status": r.status.value,
            }
            for r in register.risks
        ],
        "treatments": [
            {
                "decision_id": d.decision_id,
                "risk_id": d.risk_id,
                "method": d.method.value,
                "justification": d.justification,
                "selected_controls": list(d.selected_controls),
                "residual_threat": d.residual_threat.label if d.residual_threat else None,
                "residual_vuln": d.residual_vuln.label if d.residual_vuln else None,
                "transferee": d.transferee,
                "residual_risk": d.residual_risk,
                "decided_at": d.decided_at,
            }
            for d in register.treatments
        ],
        "pdca": {
            "phase": register.pdca.phase.value,
            "iteration": register.pdca.iteration,
            "soa_generated_at_revision": register.pdca.soa_generated_at_revision,
            "implementations": [
                {
                    "question_id": e.question_id,
                    "implemented": e.implemented,
                    "note": e.note,
                    "recorded_at": e.recorded_at,
                }
                for e in register.pdca.implementations
            ],
            "reviews": [
                {
                    "review_id": rv.review_id,
                    "controls_covered": list(rv.controls_covered),
                    "findings": [
                        {"finding_id": f.finding_id, "text": f.text} for f in rv.findings
                    ],
                    "note": rv.note,
                    "recorded_at": rv.recorded_at,
                }
                for rv in register.pdca.reviews
            ],
            "actions": [
                {
                    "finding_id": a.finding_id,
                    "note": a.note,
                    "deferred": a.deferred,
                    "recorded_at": a.recorded_at,
                }
                for a in register.pdca.actions
            ],
            "history": [
                {"phase": h.phase.value, "timestamp": h.timestamp, "note": h.note}
                for h in register.pdca.history
            ],
        },
        "revision": register.revision,
    }


def dumps_register(register: AssessmentRegister) -> str:
    return json.dumps(register_to_dict(register), indent=2, ensure_ascii=False) + "\n"


def save_register(register: AssessmentRegister, path: Union[str, Path]) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    payload = dumps_register(register)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=".register-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require_keys(obj: dict, required: dict, where: str) -> None:
    missing = [k for k in required if k not in obj]
    if missing:
        raise SchemaViolation(f"{where}: missing field(s) {', '.join(missing)}")
    unknown = [k for k in obj if k not in required]
    if unknown:
        raise SchemaViolation(f"{where}: unknown field(s) {', '.join(unknown)}")
    for key, typ in required.items():
        value = obj[key]
        if typ is None:
            continue
        if typ is int:
            if type(value) is not int:
                raise SchemaViolation(f"{where}: field {key!r} must be an integer")
        elif typ is bool:
            if type(value) is not bool:
                raise SchemaViolation(f"{where}: field {key!r} must be a boolean")
        elif not isinstance(value, typ):
            raise SchemaViolation(f"{where}: field {key!r} must be {typ.__name__}")


def _parse_rating(value, where: str) -> Rating:
    if not isinstance(value, str):
        raise SchemaViolation(f"{where}: rating must be a string")
    try:
        return Rating.parse(value)
    except ValueError as exc:
        raise SchemaViolation(f"{where}: {exc}") from None


def _parse_optional_rating(value, where: str) -> Rating | None:
    if value is None:
        return None
    return _parse_rating(value, where)


def load_register(source: Union[str, bytes, IO, Path], catalog: Catalog) -> AssessmentRegister:
    """Load a register file, revalidating references and every derived field.

    A derived value that disagrees with recomputation raises
    TamperedDerivedField: the file was edited outside the engine.
    """
    if isinstance(source, Path):
        source = source.read_bytes()
    elif hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"register is not UTF-8: {exc}") from None
    if not source.strip():
        raise MalformedDocument("register document is empty")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"register is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("register document must be a JSON object")

    _require_keys(
        doc,
        {
            "format": str,
            "scope_statement": str,
            "policy_statement": str,
            "acceptance_threshold": int,
            "catalog_version": str,
            "assets": list,
            "risks": list,
            "treatments": list,
            "pdca": dict,
            "revision": int,
        },
        "register",
    )
    if doc["format"] != FORMAT:
        raise SchemaViolation(f"unsupported register format: {doc['format']!r}")
    if doc["catalog_version"] != catalog.catalog_version:
        raise CatalogMismatch(
            f"register was built against catalog {doc['catalog_version']!r}, "
            f"supplied catalog is {catalog.catalog_version!r}"
        )
    if doc["revision"] < 0:
        raise SchemaViolation("revision must be non-negative")

    assets = []
    for i, raw in enumerate(doc["assets"]):
        where = f"assets[{i}]"
        if not isinstance(raw, dict):
            raise SchemaViolation(f"{where}: must be an object")
        _require_keys(
            raw,
            {
                "asset_id": str,
                "name": str,
                "category": str,
                "confidentiality": str,
                "integrity": str,
                "availability": str,
                "asset_value": int,
            },
            where,
        )
        try:
            category = AssetCategory.parse(raw["category"])
        except Exception:
            raise SchemaViolation(f"{where}: unknown category {raw['category']!r}") from None
        c = _parse_rating(raw["confidentiality"], where)
        it = _parse_rating(raw["integrity"], where)
        av = _parse_rating(raw["availability"], where)
        derived = scoring.asset_value(c, it, av)
        if raw["asset_value"] != derived.value:
            raise TamperedDerivedField(
                f"{where}: stored asset_value {raw['asset_value']} != derived {derived.value}"
            )
        assets.append(
            AssetProfile(raw["asset_id"], raw["name"], category, c, it, av, derived)
        )
    register = AssessmentRegister(
        scope_statement=doc["scope_statement"],
        policy_statement=doc["policy_statement"],
        acceptance_threshold=AcceptanceThreshold(doc["acceptance_threshold"]),
        catalog_version=doc["catalog_version"],
        assets=assets,
        revision=doc["revision"],
    )

    for i, raw in enumerate(doc["risks"]):
        where = f"risks[{i}]"
        if not isinstance(raw, dict):
            raise SchemaViolation(f"{where}: must be an object")
        _require_keys(
            raw,
            {
                "risk_id": str,
                "asset_id": str,
                "threat_id": str,
                "threat_rating": str,
                "vuln_id": str,
                "vuln_rating": str,
                "risk_value": int,
                "classification": str,
                "status": str,
            },
            where,
        )
        try:
            asset = register.asset(raw["asset_id"])
        except Exception:
            raise DanglingReference(f"{where}: unknown asset {raw['asset_id']!r}") from None
        try:
            catalog.vulnerability(raw["threat_id"], raw["vuln_id"])
        except Exception:
            raise DanglingReference(
                f"{where}: ({raw['threat_id']!r}, {raw['vuln_id']!r}) does not resolve in the catalog"
            ) from None
        threat_rating = _parse_rating(raw["threat_rating"], where)
        vuln_rating = _parse_rating(raw["vuln_rating"], where)
        derived_value = scoring.risk_value(asset.asset_value, threat_rating, vuln_rating)
        if raw["risk_value"] != derived_value.value:
            raise TamperedDerivedField(
                f"{where}: stored risk_value {raw['risk_value']} != derived {derived_value.value}"
            )
        derived_class = scoring.classify(derived_value, register.acceptance_threshold)
        if raw["classification"] != derived_class.value:
            raise TamperedDerivedField(
                f"{where}: stored classification {raw['classification']!r} != derived {derived_class.value!r}"
            )
        try:
            status = RiskStatus(raw["status"])
        except ValueError:
            raise SchemaViolation(f"{where}: unknown status {raw['status']!r}") from None
        register.risks.append(
            RiskRecord(
                raw["risk_id"],
                raw["asset_id"],
                raw["threat_id"],
                threat_rating,
                raw["vuln_id"],
                vuln_rating,
                derived_value,
                derived_class,
                status,
            )
        )

    for i, raw in enumerate(doc["treatments"]):
        where = f"treatments[{i}]"
        if not isinstance(raw, dict):
            raise SchemaViolation(f"{where}: must be an object")
        _require_keys(
            raw,
            {
                "decision_id": str,
                "risk_id": str,
                "method": str,
                "justification": str,
                "selected_controls": list,
                "residual_threat": None,
                "residual_vuln": None,
                "transferee": None,
                "residual_risk": int,
                "decided_at": str,
            },
            where,
        )
        try:
            risk = register.risk(raw["risk_id"])
        except Exception:
            raise DanglingReference(f"{where}: unknown risk {raw['risk_id']!r}") from None
        try:
            method = TreatmentMethod(raw["method"])
        except ValueError:
            raise SchemaViolation(f"{where}: unknown method {raw['method']!r}") from None
        decision = TreatmentDecision(
            decision_id=raw["decision_id"],
            risk_id=raw["risk_id"],
            method=method,
            justification=raw["justification"],
            selected_controls=tuple(raw["selected_controls"]),
            residual_threat=_parse_optional_rating(raw["residual_threat"], where),
            residual_vuln=_parse_optional_rating(raw["residual_vuln"], where),
            transferee=raw["transferee"],
            residual_risk=raw["residual_risk"],
            decided_at=raw["decided_at"],
        )
        derived_residual = residual_of(decision, risk, register.asset(risk.asset_id))
        if decision.residual_risk != derived_residual:
            raise TamperedDerivedField(
                f"{where}: stored residual_risk {decision.residual_risk} != derived {derived_residual}"
            )
        register.treatments.append(decision)

    register.pdca = _parse_pdca(doc["pdca"])
    plan_entries = sum(1 for h in register.pdca.history if h.phase is PdcaPhase.PLAN)
    if register.pdca.iteration != 1 + plan_entries:
        raise TamperedDerivedField(
            f"pdca: iteration {register.pdca.iteration} != 1 + {plan_entries} Plan re-entries in history"
        )
    return register


def _parse_pdca(raw: dict) -> PdcaState:
    _require_keys(
        raw,
        {
            "phase": str,
            "iteration": int,
            "soa_generated_at_revision": None,
            "implementations": list,
            "reviews": list,
            "actions": list,
            "history": list,
        },
        "pdca",
    )
    try:
        phase = PdcaPhase(raw["phase"])
    except ValueError:
        raise SchemaViolation(f"pdca: unknown phase {raw['phase']!r}") from None
    if raw["iteration"] < 1:
        raise SchemaViolation("pdca: iteration must be >= 1")
    marker = raw["soa_generated_at_revision"]
    if marker is not None and type(marker) is not int:
        raise SchemaViolation("pdca: soa_generated_at_revision must be an integer or null")

    implementations = []
    for i, entry in enumerate(raw["implementations"]):
        where = f"pdca.implementations[{i}]"
        _require_keys(entry, {"question_id": str, "implemented": bool, "note": str, "recorded_at": str}, where)
        implementations.append(ImplementationEvidence(**entry))

    reviews = []
    for i, entry in enumerate(raw["reviews"]):
        where = f"pdca.reviews[{i}]"
        _require_keys(
            entry,
            {"review_id": str, "controls_covered": list, "findings": list, "note": str, "recorded_at": str},
            where,
        )
        findings = []
        for j, fraw in enumerate(entry["findings"]):
            _require_keys(fraw, {"finding_id": str, "text": str}, f"{where}.findings[{j}]")
            findings.append(ReviewFinding(**fraw))
        reviews.append(
            ReviewRecord(
                review_id=entry["review_id"],
                controls_covered=tuple(entry["controls_covered"]),
                findings=findings,
                note=entry["note"],
                recorded_at=entry["recorded_at"],
            )
        )

    actions = []
    for i, entry in enumerate(raw["actions"]):
        where = f"pdca.actions[{i}]"
        _require_keys(entry, {"finding_id": str, "note": str, "deferred": bool, "recorded_at": str}, where)
        actions.append(CorrectiveAction(**entry))

    history = []
    for i, entry in enumerate(raw["history"]):
        where = f"pdca.history[{i}]"
        _require_keys(entry, {"phase": str, "timestamp": str, "note": str}, where)
        try:
            entry_phase = PdcaPhase(entry["phase"])
        except ValueError:
            raise SchemaViolation(f"{where}: unknown phase {entry['phase']!r}") from None
        history.append(HistoryEntry(entry_phase, entry["timestamp"], entry["note"]))

    return PdcaState(
        phase=phase,
        iteration=raw["iteration"],
        soa_generated_at_revision=marker,
        implementations=implementations,
        reviews=reviews,
        actions=actions,
        history=history,
    )


def load_register_file(path: Union[str, Path], catalog: Catalog) -> AssessmentRegister:
    return load_register(Path(path), catalog)
