"""Shared test utilities: deterministic clocks and randomized register building."""

from __future__ import annotations

import random
from datetime import datetime, timezone

from lanrisk import register as reg, treatment as trt
from lanrisk.catalog import Catalog
from lanrisk.model import AssessmentRegister, RiskStatus, TreatmentMethod
from lanrisk.scoring import Classification, Rating

NOW = datetime(2026, 8, 10, 12, 0, 0, tzinfo=timezone.utc)

SCOPE = "LAN and its devices"
POLICY = "Asset management and device security per organizational policy"


def rand_rating(rng: random.Random) -> Rating:
    return Rating.from_numeric(rng.randint(1, 3))


def rand_rating_at_most(rng: random.Random, ceiling: Rating) -> Rating:
    return Rating.from_numeric(rng.randint(1, ceiling.numeric))


def fresh_register(catalog: Catalog, threshold: int = 27) -> AssessmentRegister:
    return reg.create_register(SCOPE, POLICY, threshold, catalog)


def add_random_asset(register: AssessmentRegister, catalog: Catalog, rng: random.Random) -> str:
    category = rng.choice([t.asset_category for t in catalog.threats])
    name = f"device-{len(register.assets) + 1}-{rng.randint(1000, 9999)}"
    while any(a.name == name for a in register.assets):
        name += "x"
    return reg.add_asset(
        register, name, category, rand_rating(rng), rand_rating(rng), rand_rating(rng)
    )


def add_random_risk(register: AssessmentRegister, catalog: Catalog, rng: random.Random) -> str | None:
    """Instantiate a random not-yet-registered (asset, threat, vuln) risk."""
    if not register.assets:
        return None
    taken = {(r.asset_id, r.threat_id, r.vuln_id) for r in register.risks}
    assets = list(register.assets)
    rng.shuffle(assets)
    for asset in assets:
        threats = [t for t in catalog.threats if t.asset_category is asset.category]
        rng.shuffle(threats)
        for threat in threats:
            vulns = list(threat.vulnerabilities)
            rng.shuffle(vulns)
            for vuln in vulns:
                if (asset.asset_id, threat.threat_id, vuln.vuln_id) in taken:
                    continue
                record = reg.instantiate_risk(
                    register,
                    catalog,
                    asset.asset_id,
                    threat.threat_id,
                    rand_rating(rng),
                    vuln.vuln_id,
                    rand_rating(rng),
                )
                return record.risk_id
    return None


def treat_random_risk(register: AssessmentRegister, catalog: Catalog, rng: random.Random) -> str | None:
    open_risks = [r for r in register.risks if r.status is RiskStatus.OPEN]
    if not open_risks:
        return None
    risk = rng.choice(open_risks)
    method = rng.choice(list(TreatmentMethod))
    kwargs = {}
    if method is TreatmentMethod.LIMITATION:
        vuln = catalog.vulnerability(risk.threat_id, risk.vuln_id)
        count = rng.randint(1, len(vuln.control_refs))
        kwargs["controls"] = rng.sample(list(vuln.control_refs), count)
        kwargs["residual_threat"] = rand_rating_at_most(rng, risk.threat_rating)
        kwargs["residual_vuln"] = rand_rating_at_most(rng, risk.vuln_rating)
    elif method is TreatmentMethod.TRANSFER:
        kwargs["transferee"] = "network-insurer"
    decision = trt.apply_treatment(
        register, catalog, risk.risk_id, method, f"decision for {risk.risk_id}", now=NOW, **kwargs
    )
    return decision.decision_id


def random_mutation(register: AssessmentRegister, catalog: Catalog, rng: random.Random) -> str:
    """Apply one random legal Plan-phase mutation; returns the op applied."""
    choices = ["add_asset"]
    if register.assets:
        choices += ["rate_asset", "add_risk", "add_risk"]
    if any(r.status is RiskStatus.OPEN for r in register.risks):
        choices += ["treat", "treat"]
    if any(r.status is not RiskStatus.OPEN for r in register.risks):
        choices.append("reopen")
    choices.append("set_threshold")

    op = rng.choice(choices)
    if op == "add_asset":
        add_random_asset(register, catalog, rng)
    elif op == "rate_asset":
        asset = rng.choice(register.assets)
        reg.rate_asset(register, asset.asset_id, rand_rating(rng), rand_rating(rng), rand_rating(rng))
    elif op == "add_risk":
        if add_random_risk(register, catalog, rng) is None:
            add_random_asset(register, catalog, rng)
            op = "add_asset"
    elif op == "treat":
        treat_random_risk(register, catalog, rng)
    elif op == "reopen":
        decided = [r for r in register.risks if r.status is not RiskStatus.OPEN]
        reg.reopen_risk(register, rng.choice(decided).risk_id)
    else:
        reg.set_threshold(register, rng.randint(3, 81))
    return op


def build_random_register(
    catalog: Catalog, rng: random.Random, steps: int = 25
) -> AssessmentRegister:
    register = fresh_register(catalog, threshold=rng.randint(3, 81))
    for _ in range(steps):
        random_mutation(register, catalog, rng)
    return register


def settle_plan_phase(register: AssessmentRegister, catalog: Catalog, rng: random.Random) -> None:
    """Make the Plan checklist fully satisfied."""
    if not register.assets:
        add_random_asset(register, catalog, rng)
    while True:
        pending = [
            r
            for r in register.risks
            if r.status is RiskStatus.OPEN and r.classification is Classification.REQUIRES_TREATMENT
        ]
        if not pending:
            break
        treat_random_risk(register, catalog, rng)
    reg.record_soa_generated(register)
