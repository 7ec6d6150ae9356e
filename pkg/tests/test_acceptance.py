"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with ``pytest tests/test_acceptance.py -s``."""

import io
import itertools
import json
import os
import random
import time
from pathlib import Path

import pytest

import helpers
from lanrisk import pdca, register as reg, treatment as trt
from lanrisk.catalog import AssetCategory, load_shipped_catalog, query_threats, validate_catalog
from lanrisk.cli import run
from lanrisk.errors import PhaseIncomplete, EmptyNote, TamperedDerivedField
from lanrisk.model import PdcaPhase, RiskStatus, TreatmentMethod
from lanrisk.scoring import Rating, asset_value, risk_value


def report(number: int, text: str):
    print(f"ACCEPTANCE {number} PASS: {text}")


def test_criterion_1_scoring_oracle():
    """All 243 rating combinations match an independent brute force; bounds
    3 and 81 attained exactly once; under one second."""
    started = time.perf_counter()
    values = []
    for c, i, a, t, v in itertools.product((1, 2, 3), repeat=5):
        engine = risk_value(
            asset_value(Rating.from_numeric(c), Rating.from_numeric(i), Rating.from_numeric(a)),
            Rating.from_numeric(t),
            Rating.from_numeric(v),
        ).value
        oracle = (c + i + a) * t * v  # independent brute force
        assert engine == oracle, (c, i, a, t, v)
        values.append(engine)
    assert values.count(3) == 1 and values.count(81) == 1
    assert min(values) == 3 and max(values) == 81
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    report(1, f"243/243 combinations match brute force in {elapsed * 1000:.0f} ms, bounds unique")


def test_criterion_2_catalog_fidelity():
    """Shipped catalog: clean validation, 11 domains, 23 threats split
    7/3/8/5, six vulnerabilities under unauthorized access, verbatim
    technique spot checks."""
    catalog = load_shipped_catalog()
    assert validate_catalog(catalog).findings == ()
    assert len(catalog.domains) == 11
    assert len(catalog.threats) == 23
    split = [
        len(query_threats(catalog, c))
        for c in (
            AssetCategory.CISCO_IOS_SOFTWARE,
            AssetCategory.LAYER3,
            AssetCategory.LAYER2,
            AssetCategory.DEVICE_HARDWARE,
        )
    ]
    assert split == [7, 3, 8, 5]
    unauthorized = catalog.threat("ios.unauthorized-access")
    assert unauthorized.name == "Unauthorized access"
    assert len(unauthorized.vulnerabilities) == 6
    spot_checks = {
        "ios.max-memory": "Configure the router with the maximum amount of memory possible",
        "l2.dynamic-arp-inspection": "To enable of Dynamic ARP Inspection(DAI) feature on switch (best technique)",
        "hw.install-ups": "Install an uninterruptible power supply (UPS) and keep spare "
        "components available and check out it to ensure the performance",
    }
    for technique_id, body in spot_checks.items():
        assert catalog.techniques_by_id[technique_id].body == body
    report(2, "0 findings, 11 domains, 23 threats split 7/3/8/5, 3 verbatim technique bodies")


def test_criterion_3_derivation_invariant_under_fuzzing(catalog):
    """>=500 randomized mutation sequences followed by recompute_all produce
    zero field changes."""
    sequences = 0
    for seed in range(50):
        rng = random.Random(3000 + seed)
        register = helpers.fresh_register(catalog, threshold=rng.randint(3, 81))
        for _ in range(10):
            for _ in range(rng.randint(3, 6)):
                helpers.random_mutation(register, catalog, rng)
            before = reg.dumps_register(register)
            reg.recompute_all(register)
            assert reg.dumps_register(register) == before
            sequences += 1
    assert sequences >= 500
    report(3, f"{sequences} mutation sequences left zero derived-field changes")


def test_criterion_4_soa_traceability(catalog):
    """>=100 randomized registers: included-control <-> limitation-decision
    tracing equals a brute-force scan in both directions."""
    registers = 0
    for seed in range(110):
        rng = random.Random(4000 + seed)
        register = helpers.build_random_register(catalog, rng, steps=rng.randint(5, 40))
        soa = trt.generate_soa(register, catalog, helpers.NOW)

        # brute force, forward: every limitation citation on a non-retired risk
        oracle: dict[str, set[str]] = {}
        for decision in register.treatments:
            if decision.method is not TreatmentMethod.LIMITATION:
                continue
            risk = next(r for r in register.risks if r.risk_id == decision.risk_id)
            if risk.status is RiskStatus.RETIRED:
                continue
            for question_id in decision.selected_controls:
                oracle.setdefault(question_id, set()).add(risk.risk_id)

        engine = {e.question_id: set(e.linked_risk_ids) for e in soa.entries if e.included}
        # both directions: same key set, same linked risks
        assert engine == oracle, f"seed {seed}"
        # excluded entries trace to nothing
        for entry in soa.entries:
            if not entry.included:
                assert entry.question_id not in oracle
        registers += 1
    assert registers >= 100
    report(4, f"{registers} randomized registers traced bidirectionally against brute force")


def test_criterion_5_pdca_enforcement(catalog):
    """>=1000 fuzzed advance attempts: only legal edges accepted, iteration
    bookkeeping exact, failed attempts leave the register byte-identical."""
    legal = {
        (PdcaPhase.PLAN, PdcaPhase.DO),
        (PdcaPhase.DO, PdcaPhase.CHECK),
        (PdcaPhase.CHECK, PdcaPhase.ACT),
        (PdcaPhase.ACT, PdcaPhase.PLAN),
    }
    attempts = accepted = rejected = 0
    for seed in range(25):
        rng = random.Random(5000 + seed)
        register = helpers.build_random_register(catalog, rng, steps=6)
        act_to_plan = 0
        for _ in range(44):
            roll = rng.random()
            if roll < 0.35:
                # try to make this phase completable before attempting
                phase = register.pdca.phase
                if phase is PdcaPhase.PLAN:
                    helpers.settle_plan_phase(register, catalog, rng)
                elif phase is PdcaPhase.DO:
                    for question_id in sorted(trt.included_controls(register)):
                        pdca.record_implementation(
                            register, question_id, True, f"deployed {question_id}", helpers.NOW
                        )
                elif phase is PdcaPhase.CHECK and not register.pdca.reviews:
                    covered = sorted(
                        e.question_id for e in register.pdca.implementations if e.implemented
                    )
                    pdca.record_review(
                        register, covered,
                        [f"gap-{rng.randint(1, 9)}"] if rng.random() < 0.4 else [],
                        "inspection", helpers.NOW,
                    )
                elif phase is PdcaPhase.ACT:
                    for review in register.pdca.reviews:
                        for finding in review.findings:
                            pdca.record_corrective_action(
                                register, finding.finding_id, "fixed", rng.random() < 0.3,
                                helpers.NOW,
                            )
            before_phase = register.pdca.phase
            before_bytes = reg.dumps_register(register)
            note = "advance" if rng.random() < 0.9 else "  "
            attempts += 1
            try:
                state = pdca.advance(register, catalog, note, helpers.NOW)
                accepted += 1
                assert (before_phase, state.phase) in legal, "illegal edge accepted"
                if (before_phase, state.phase) == (PdcaPhase.ACT, PdcaPhase.PLAN):
                    act_to_plan += 1
            except (PhaseIncomplete, EmptyNote):
                rejected += 1
                assert reg.dumps_register(register) == before_bytes, "failed advance mutated register"
        assert register.pdca.iteration == 1 + act_to_plan
        plan_entries = sum(1 for h in register.pdca.history if h.phase is PdcaPhase.PLAN)
        assert register.pdca.iteration == 1 + plan_entries
    assert attempts >= 1000
    assert accepted and rejected
    report(
        5,
        f"{attempts} fuzzed attempts: {accepted} legal transitions, "
        f"{rejected} rejections all byte-identical",
    )


NOW_FLAG = ("--now", "2026-08-10T12:00:00Z")


def scripted_session(base: Path) -> tuple[str, bytes, bytes, int, int]:
    """init -> 2 assets -> 4 risks -> strict report -> treat above-threshold
    -> soa export -> report, with byte-identical argv run from inside
    ``base`` so both sessions see the same relative paths. Returns captured
    output and artifacts."""
    base.mkdir(parents=True, exist_ok=True)
    register = "register.json"
    transcript = io.StringIO()
    previous_cwd = os.getcwd()
    os.chdir(base)

    def step(*argv, expect=0):
        stdout, stderr = io.StringIO(), io.StringIO()
        code = run(list(argv), stdout, stderr)
        assert code == expect, (argv, code, stderr.getvalue())
        transcript.write(stdout.getvalue())
        transcript.write(stderr.getvalue())
        return code

    step(
        "init", "--register", register, "--scope", "LAN and its devices",
        "--policy", "device security program", "--threshold", "27", *NOW_FLAG,
    )
    step(
        "asset", "add", "--register", register, "--name", "core-switch", "--category", "Layer2",
        "--confidentiality", "High", "--integrity", "High", "--availability", "High", *NOW_FLAG,
    )
    step(
        "asset", "add", "--register", register, "--name", "edge-router",
        "--category", "DeviceHardware",
        "--confidentiality", "Medium", "--integrity", "Medium", "--availability", "High", *NOW_FLAG,
    )
    step(
        "risk", "add", "--register", register, "--asset", "a-001",
        "--threat", "l2.mac-table-overflow", "--threat-rating", "High",
        "--vuln", "l2.mac-flooding", "--vuln-rating", "High", *NOW_FLAG,
    )  # 81
    step(
        "risk", "add", "--register", register, "--asset", "a-001",
        "--threat", "l2.dhcp-spoofing", "--threat-rating", "Medium",
        "--vuln", "l2.dhcp-request-flooding", "--vuln-rating", "Medium", *NOW_FLAG,
    )  # 36
    step(
        "risk", "add", "--register", register, "--asset", "a-001",
        "--threat", "l2.arp-spoofing", "--threat-rating", "Medium",
        "--vuln", "l2.poisoned-arp-cache", "--vuln-rating", "Low", *NOW_FLAG,
    )  # 18
    step(
        "risk", "add", "--register", register, "--asset", "a-002",
        "--threat", "hw.power-outage", "--threat-rating", "Low",
        "--vuln", "hw.no-ups", "--vuln-rating", "Low", *NOW_FLAG,
    )  # 7
    strict_before = run(
        ["report", "--register", register, "--strict", *NOW_FLAG], io.StringIO(), io.StringIO()
    )
    step(
        "treat", "r-001", "--register", register, "--method", "limitation",
        "--justification", "port security limits MAC flooding",
        "--control", "7.2", "--residual-vuln", "Low", *NOW_FLAG,
    )
    step(
        "treat", "r-002", "--register", register, "--method", "transfer",
        "--justification", "handled by managed service contract",
        "--transferee", "managed-network-provider", *NOW_FLAG,
    )
    step(
        "soa", "export", "--register", register, "--format", "csv",
        "--out", "soa.csv", *NOW_FLAG,
    )
    step("report", "--register", register, *NOW_FLAG)
    strict_after = run(
        ["report", "--register", register, "--strict", *NOW_FLAG], io.StringIO(), io.StringIO()
    )
    os.chdir(previous_cwd)
    return (
        transcript.getvalue(),
        (base / "register.json").read_bytes(),
        (base / "soa.csv").read_bytes(),
        strict_before,
        strict_after,
    )


def test_criterion_6_cli_determinism(tmp_path):
    """Two scripted runs with a fixed clock produce byte-identical transcripts,
    register files and exports; strict report exits 3 iff untreated
    above-threshold risk exists."""
    first = scripted_session(tmp_path / "one")
    second = scripted_session(tmp_path / "two")
    assert first[0] == second[0], "transcripts differ between runs"
    assert first[1] == second[1], "register files differ between runs"
    assert first[2] == second[2], "soa exports differ between runs"
    assert first[3] == 3, "strict report must exit 3 with untreated above-threshold risks"
    assert first[4] == 0, "strict report must exit 0 once all above-threshold risks are treated"
    report(6, "scripted session byte-identical across runs, strict exit codes 3 then 0")


def test_criterion_7_persistence(catalog, tmp_path):
    """Randomized registers round-trip through save/load; tampered derived
    fields are rejected on load."""
    round_trips = 0
    for seed in range(40):
        rng = random.Random(7000 + seed)
        register = helpers.build_random_register(catalog, rng, steps=rng.randint(5, 35))
        path = tmp_path / f"register-{seed}.json"
        reg.save_register(register, path)
        loaded = reg.load_register_file(path, catalog)
        assert loaded == register
        assert reg.dumps_register(loaded) == reg.dumps_register(register)
        round_trips += 1

    # tampering each class of derived field must be rejected
    rng = random.Random(7777)
    register = helpers.fresh_register(catalog)
    helpers.add_random_asset(register, catalog, rng)
    while not register.risks:
        helpers.add_random_risk(register, catalog, rng)
    helpers.treat_random_risk(register, catalog, rng)
    base = json.loads(reg.dumps_register(register))
    tampers = [
        lambda d: d["assets"][0].update(asset_value=(d["assets"][0]["asset_value"] % 7) + 3),
        lambda d: d["risks"][0].update(risk_value=(d["risks"][0]["risk_value"] % 79) + 3),
        lambda d: d["risks"][0].update(
            classification="Acceptable"
            if d["risks"][0]["classification"] == "RequiresTreatment"
            else "RequiresTreatment"
        ),
        lambda d: d["treatments"][0].update(residual_risk=d["treatments"][0]["residual_risk"] + 1),
    ]
    rejected = 0
    for tamper in tampers:
        doc = json.loads(json.dumps(base))
        tamper(doc)
        with pytest.raises(TamperedDerivedField):
            reg.load_register(json.dumps(doc), catalog)
        rejected += 1
    report(7, f"{round_trips} round-trips equal, {rejected}/4 tampered derived fields rejected")
