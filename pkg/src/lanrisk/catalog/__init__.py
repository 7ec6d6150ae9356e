"""Knowledge base of LAN threats, vulnerabilities, controls and mitigation techniques.

The catalog is a machine-readable document (``isms-catalog/1`` JSON) holding
four cross-referenced collections: security domains, audit-question controls,
mitigation techniques, and threats with their vulnerabilities. A catalog is
immutable after load; edits are new catalog versions, so risk records that
reference catalog entries stay auditable.

``load_catalog`` parses and fully validates; ``validate_catalog`` reports
findings as data (it accepts catalogs that would not load, so broken
hand-edited documents can be diagnosed rather than just rejected).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from typing import IO, Union

from ..errors import (
    DanglingReference,
    DuplicateId,
    MalformedDocument,
    SchemaViolation,
    UnknownCategory,
    UnknownThreat,
    UnknownVulnerability,
)

FORMAT = "isms-catalog/1"
SHIPPED_CATALOG = "lan-v1"

DOMAIN_MIN = 1
DOMAIN_MAX = 11


class AssetCategory(enum.Enum):
    """The four asset scopes the knowledge base covers."""

    CISCO_IOS_SOFTWARE = "CiscoIosSoftware"
    LAYER3 = "Layer3"
    LAYER2 = "Layer2"
    DEVICE_HARDWARE = "DeviceHardware"

    @classmethod
    def parse(cls, text: str) -> "AssetCategory":
        for member in cls:
            if member.value == text:
                return member
        raise UnknownCategory(f"unknown asset category: {text!r}")


@dataclass(frozen=True)
class DomainEntry:
    domain_no: int
    name: str
    description: str


@dataclass(frozen=True)
class ControlRef:
    """One audit question, e.g. ``7.84``, belonging to a numbered domain."""

    question_id: str
    domain_no: int
    text: str


@dataclass(frozen=True)
class MitigationTechnique:
    technique_id: str
    summary: str
    body: str


@dataclass(frozen=True)
class CatalogVulnerability:
    vuln_id: str
    description: str
    control_refs: tuple[str, ...]
    technique_refs: tuple[str, ...]


@dataclass(frozen=True)
class CatalogThreat:
    threat_id: str
    asset_category: AssetCategory
    name: str
    description: str
    vulnerabilities: tuple[CatalogVulnerability, ...]


@dataclass(frozen=True)
class Catalog:
    catalog_version: str
    domains: tuple[DomainEntry, ...]
    controls: tuple[ControlRef, ...]
    techniques: tuple[MitigationTechnique, ...]
    threats: tuple[CatalogThreat, ...]

    @cached_property
    def domains_by_no(self) -> dict[int, DomainEntry]:
        return {d.domain_no: d for d in self.domains}

    @cached_property
    def controls_by_id(self) -> dict[str, ControlRef]:
        return {c.question_id: c for c in self.controls}

    @cached_property
    def techniques_by_id(self) -> dict[str, MitigationTechnique]:
        return {t.technique_id: t for t in self.techniques}

    @cached_property
    def threats_by_id(self) -> dict[str, CatalogThreat]:
        return {t.threat_id: t for t in self.threats}

    def threat(self, threat_id: str) -> CatalogThreat:
        try:
            return self.threats_by_id[threat_id]
        except KeyError:
            raise UnknownThreat(f"unknown threat: {threat_id!r}") from None

    def vulnerability(self, threat_id: str, vuln_id: str) -> CatalogVulnerability:
        threat = self.threat(threat_id)
        for vuln in threat.vulnerabilities:
            if vuln.vuln_id == vuln_id:
                return vuln
        raise UnknownVulnerability(
            f"threat {threat_id!r} has no vulnerability {vuln_id!r}"
        )


@dataclass(frozen=True)
class Finding:
    """One validation issue. ``error`` findings would also block loading;
    ``warning`` findings (orphan entries) are reported but loadable."""

    kind: str
    message: str
    severity: str = "error"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not self.findings

    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")


# -- parsing ---------------------------------------------------------------

def _require_keys(obj: dict, required: dict, where: str) -> None:
    missing = [k for k in required if k not in obj]
    if missing:
        raise SchemaViolation(f"{where}: missing field(s) {', '.join(missing)}")
    unknown = [k for k in obj if k not in required]
    if unknown:
        raise SchemaViolation(f"{where}: unknown field(s) {', '.join(unknown)}")
    for key, typ in required.items():
        value = obj[key]
        if typ is int:
            # bool is an int subclass; reject it explicitly
            if type(value) is not int:
                raise SchemaViolation(f"{where}: field {key!r} must be an integer")
        elif not isinstance(value, typ):
            raise SchemaViolation(f"{where}: field {key!r} must be {typ.__name__}")


def _string_list(value, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaViolation(f"{where}: must be a list of strings")
    return tuple(value)


def parse_catalog(source: Union[str, bytes, IO]) -> Catalog:
    """Parse a catalog document (syntax + strict schema). No semantic checks:
    run ``validate_catalog`` or use ``load_catalog`` for those."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"catalog is not UTF-8: {exc}") from None
    if not source.strip():
        raise MalformedDocument("catalog document is empty")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("catalog document must be a JSON object")

    _require_keys(
        doc,
        {
            "format": str,
            "catalog_version": str,
            "domains": list,
            "controls": list,
            "techniques": list,
            "threats": list,
        },
        "catalog",
    )
    if doc["format"] != FORMAT:
        raise SchemaViolation(f"unsupported catalog format: {doc['format']!r}")

    domains = []
    for i, raw in enumerate(doc["domains"]):
        if not isinstance(raw, dict):
            raise SchemaViolation(f"domains[{i}]: must be an object")
        _require_keys(raw, {"domain_no": int, "name": str, "description": str}, f"domains[{i}]")
        domains.append(DomainEntry(**raw))

    controls = []
    for i, raw in enumerate(doc["controls"]):
        if not isinstance(raw, dict):
            raise SchemaViolation(f"controls[{i}]: must be an object")
        _require_keys(raw, {"question_id": str, "domain_no": int, "text": str}, f"controls[{i}]")
        controls.append(ControlRef(**raw))

    techniques = []
    for i, raw in enumerate(doc["techniques"]):
        if not isinstance(raw, dict):
            raise SchemaViolation(f"techniques[{i}]: must be an object")
        _require_keys(raw, {"technique_id": str, "summary": str, "body": str}, f"techniques[{i}]")
        techniques.append(MitigationTechnique(**raw))

    threats = []
    for i, raw in enumerate(doc["threats"]):
        if not isinstance(raw, dict):
            raise SchemaViolation(f"threats[{i}]: must be an object")
        _require_keys(
            raw,
            {
                "threat_id": str,
                "asset_category": str,
                "name": str,
                "description": str,
                "vulnerabilities": list,
            },
            f"threats[{i}]",
        )
        try:
            category = AssetCategory.parse(raw["asset_category"])
        except UnknownCategory as exc:
            raise SchemaViolation(f"threats[{i}]: {exc}") from None
        vulns = []
        for j, vraw in enumerate(raw["vulnerabilities"]):
            where = f"threats[{i}].vulnerabilities[{j}]"
            if not isinstance(vraw, dict):
                raise SchemaViolation(f"{where}: must be an object")
            _require_keys(
                vraw,
                {"vuln_id": str, "description": str, "control_refs": list, "technique_refs": list},
                where,
            )
            vulns.append(
                CatalogVulnerability(
                    vuln_id=vraw["vuln_id"],
                    description=vraw["description"],
                    control_refs=_string_list(vraw["control_refs"], f"{where}.control_refs"),
                    technique_refs=_string_list(vraw["technique_refs"], f"{where}.technique_refs"),
                )
            )
        threats.append(
            CatalogThreat(
                threat_id=raw["threat_id"],
                asset_category=category,
                name=raw["name"],
                description=raw["description"],
                vulnerabilities=tuple(vulns),
            )
        )

    return Catalog(
        catalog_version=doc["catalog_version"],
        domains=tuple(domains),
        controls=tuple(controls),
        techniques=tuple(techniques),
        threats=tuple(threats),
    )


# -- validation ------------------------------------------------------------

def validate_catalog(catalog: Catalog) -> ValidationReport:
    """Check every catalog invariant; findings are data, never exceptions."""
    findings: list[Finding] = []

    seen_domains: set[int] = set()
    for domain in catalog.domains:
        if not DOMAIN_MIN <= domain.domain_no <= DOMAIN_MAX:
            findings.append(Finding("schema", f"domain_no {domain.domain_no} out of range 1..11"))
        if domain.domain_no in seen_domains:
            findings.append(Finding("duplicate-id", f"duplicate domain_no {domain.domain_no}"))
        seen_domains.add(domain.domain_no)

    seen_controls: set[str] = set()
    for control in catalog.controls:
        if control.question_id in seen_controls:
            findings.append(Finding("duplicate-id", f"duplicate control {control.question_id}"))
        seen_controls.add(control.question_id)
        if control.domain_no not in seen_domains:
            findings.append(
                Finding("dangling-reference", f"control {control.question_id} cites missing domain {control.domain_no}")
            )
        prefix = control.question_id.split(".", 1)[0]
        if prefix.isdigit() and DOMAIN_MIN <= int(prefix) <= DOMAIN_MAX and int(prefix) != control.domain_no:
            findings.append(
                Finding(
                    "schema",
                    f"control {control.question_id}: id prefix {prefix} does not match domain_no {control.domain_no}",
                )
            )

    seen_techniques: set[str] = set()
    for technique in catalog.techniques:
        if technique.technique_id in seen_techniques:
            findings.append(Finding("duplicate-id", f"duplicate id {technique.technique_id}"))
        seen_techniques.add(technique.technique_id)
        if not technique.body.strip():
            findings.append(Finding("schema", f"technique {technique.technique_id} has empty body"))

    seen_threats: set[str] = set()
    seen_vulns: set[str] = set()
    used_controls: set[str] = set()
    used_techniques: set[str] = set()
    for threat in catalog.threats:
        if threat.threat_id in seen_threats:
            findings.append(Finding("duplicate-id", f"duplicate threat {threat.threat_id}"))
        seen_threats.add(threat.threat_id)
        if not threat.vulnerabilities:
            findings.append(Finding("schema", f"threat without vulnerability: {threat.threat_id}"))
        for vuln in threat.vulnerabilities:
            if vuln.vuln_id in seen_vulns:
                findings.append(Finding("duplicate-id", f"duplicate vulnerability {vuln.vuln_id}"))
            seen_vulns.add(vuln.vuln_id)
            if not vuln.control_refs:
                findings.append(Finding("schema", f"vulnerability {vuln.vuln_id} cites no control"))
            if not vuln.technique_refs:
                findings.append(Finding("schema", f"vulnerability {vuln.vuln_id} cites no technique"))
            for ref in vuln.control_refs:
                used_controls.add(ref)
                if ref not in seen_controls:
                    findings.append(
                        Finding("dangling-reference", f"vulnerability {vuln.vuln_id} cites missing control {ref}")
                    )
            for ref in vuln.technique_refs:
                used_techniques.add(ref)
                if ref not in seen_techniques:
                    findings.append(
                        Finding("dangling-reference", f"vulnerability {vuln.vuln_id} cites missing technique {ref}")
                    )

    for control in catalog.controls:
        if control.question_id not in used_controls:
            findings.append(
                Finding("orphan", f"control {control.question_id} is not cited by any vulnerability", "warning")
            )
    for technique in catalog.techniques:
        if technique.technique_id not in used_techniques:
            findings.append(
                Finding("orphan", f"technique {technique.technique_id} is not cited by any vulnerability", "warning")
            )

    return ValidationReport(tuple(findings))


_ERROR_BY_KIND = {
    "duplicate-id": DuplicateId,
    "dangling-reference": DanglingReference,
    "schema": SchemaViolation,
}


def load_catalog(source: Union[str, bytes, IO]) -> Catalog:
    """Parse and validate; raises the error matching the first finding."""
    catalog = parse_catalog(source)
    report = validate_catalog(catalog)
    errors = report.errors()
    if errors:
        first = errors[0]
        raise _ERROR_BY_KIND[first.kind](first.message)
    return catalog


# -- serialization ---------------------------------------------------------

def catalog_to_dict(catalog: Catalog) -> dict:
    return {
        "format": FORMAT,
        "catalog_version": catalog.catalog_version,
        "domains": [
            {"domain_no": d.domain_no, "name": d.name, "description": d.description}
            for d in catalog.domains
        ],
        "controls": [
            {"question_id": c.question_id, "domain_no": c.domain_no, "text": c.text}
            for c in catalog.controls
        ],
        "techniques": [
            {"technique_id": t.technique_id, "summary": t.summary, "body": t.body}
            for t in catalog.techniques
        ],
        "threats": [
            {
                "threat_id": t.threat_id,
                "asset_category": t.asset_category.value,
                "name": t.name,
                "description": t.description,
                "vulnerabilities": [
                    {
                        "vuln_id": v.vuln_id,
                        "description": v.description,
                        "control_refs": list(v.control_refs),
                        "technique_refs": list(v.technique_refs),
                    }
                    for v in t.vulnerabilities
                ],
            }
            for t in catalog.threats
        ],
    }


def serialize_catalog(catalog: Catalog) -> str:
    return json.dumps(catalog_to_dict(catalog), indent=2, ensure_ascii=False) + "\n"


# -- queries ---------------------------------------------------------------

def query_threats(catalog: Catalog, category: Union[AssetCategory, str]) -> list[CatalogThreat]:
    """All threats of one asset category, in catalog order."""
    if isinstance(category, str):
        category = AssetCategory.parse(category)
    return [t for t in catalog.threats if t.asset_category is category]


def list_vulnerabilities(catalog: Catalog, threat_id: str) -> list[CatalogVulnerability]:
    """All vulnerabilities of a threat, in catalog order."""
    return list(catalog.threat(threat_id).vulnerabilities)


def lookup_mitigations(
    catalog: Catalog, threat_id: str, vuln_id: str
) -> list[tuple[ControlRef, list[MitigationTechnique]]]:
    """Each control cited for the vulnerability, paired with the
    vulnerability's techniques. Never empty for a valid catalog."""
    vuln = catalog.vulnerability(threat_id, vuln_id)
    techniques = [catalog.techniques_by_id[ref] for ref in vuln.technique_refs]
    return [(catalog.controls_by_id[ref], list(techniques)) for ref in vuln.control_refs]


# -- shipped data ----------------------------------------------------------

def shipped_catalog_bytes() -> bytes:
    return resources.files(__package__).joinpath(f"{SHIPPED_CATALOG}.json").read_bytes()


def load_shipped_catalog() -> Catalog:
    return load_catalog(shipped_catalog_bytes())
