"""Command-line front end.

Contract: diagnostics go to stderr, machine output (ids, tables, exports)
goes to stdout or ``--out``; identical inputs produce byte-identical output
(inject timestamps with ``--now`` for reproducible runs). Exit codes:
0 success, 1 validation/domain error, 2 usage error, 3 strict-mode policy
failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Sequence

from . import pdca, register as reg, scoring, treatment
from .catalog import (
    AssetCategory,
    Catalog,
    load_catalog,
    parse_catalog,
    shipped_catalog_bytes,
    validate_catalog,
)
from .errors import DomainError
from .model import TreatmentMethod, parse_timestamp
from .scoring import Rating

DEFAULT_REGISTER = "register.json"
CATALOG_ENV = "ISMS_CATALOG"

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_STRICT = 3

CATEGORY_CHOICES = [c.value for c in AssetCategory]
METHOD_CHOICES = [m.value.lower() for m in TreatmentMethod]


class UsageError(Exception):
    def __init__(self, message: str, parser: argparse.ArgumentParser):
        super().__init__(message)
        self.parser = parser


class Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting the process."""

    def error(self, message):  # noqa: A003 - argparse API
        raise UsageError(message, self)


def _rating(text: str) -> Rating:
    return Rating.parse(text)


def _timestamp(text: str) -> datetime:
    try:
        return parse_timestamp(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"not a timestamp (expected YYYY-MM-DDTHH:MM:SSZ): {text!r}"
        ) from None


def _override(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected QUESTION_ID=TEXT, got {text!r}")
    question_id, justification = text.split("=", 1)
    return question_id, justification


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--register", default=DEFAULT_REGISTER, help="register file path")
    common.add_argument("--catalog", default=None, help="catalog file path (overrides env and shipped)")
    common.add_argument("--now", type=_timestamp, default=None, help="inject the clock (UTC, YYYY-MM-DDTHH:MM:SSZ)")
    common.add_argument("--format", choices=["table", "csv", "md"], default="table", help="output format")
    common.add_argument("--out", default=None, help="write machine output to a file instead of stdout")

    parser = Parser(prog="lanrisk", description="LAN security risk assessment and treatment engine")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("init", parents=[common], help="create a new register")
    p.add_argument("--scope", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--threshold", type=int, default=scoring.DEFAULT_THRESHOLD.threshold)

    p = sub.add_parser("catalog", parents=[common], help="inspect or validate the catalog")
    p.add_argument("action", choices=["validate", "show"])
    p.add_argument("--category", choices=CATEGORY_CHOICES, default=None)

    p = sub.add_parser("asset", parents=[common], help="manage assets")
    asset_sub = p.add_subparsers(dest="action", metavar="action", required=True)
    pa = asset_sub.add_parser("add", parents=[common])
    pa.add_argument("--name", required=True)
    pa.add_argument("--category", choices=CATEGORY_CHOICES, required=True)
    pa.add_argument("--confidentiality", type=_rating, required=True)
    pa.add_argument("--integrity", type=_rating, required=True)
    pa.add_argument("--availability", type=_rating, required=True)
    pa = asset_sub.add_parser("rate", parents=[common])
    pa.add_argument("asset_id")
    pa.add_argument("--confidentiality", type=_rating, required=True)
    pa.add_argument("--integrity", type=_rating, required=True)
    pa.add_argument("--availability", type=_rating, required=True)
    asset_sub.add_parser("list", parents=[common])

    p = sub.add_parser("risk", parents=[common], help="manage risks")
    risk_sub = p.add_subparsers(dest="action", metavar="action", required=True)
    pr = risk_sub.add_parser("add", parents=[common])
    pr.add_argument("--asset", required=True)
    pr.add_argument("--threat", required=True)
    pr.add_argument("--threat-rating", type=_rating, required=True)
    pr.add_argument("--vuln", required=True)
    pr.add_argument("--vuln-rating", type=_rating, required=True)
    pr = risk_sub.add_parser("list", parents=[common])
    pr.add_argument("--sort", choices=["value", "id"], default="value")

    p = sub.add_parser("treat", parents=[common], help="record a treatment decision")
    p.add_argument("risk_id")
    p.add_argument("--method", choices=METHOD_CHOICES, required=True)
    p.add_argument("--justification", required=True)
    p.add_argument("--control", action="append", default=[], help="selected control (repeatable, limitation only)")
    p.add_argument("--residual-threat", type=_rating, default=None)
    p.add_argument("--residual-vuln", type=_rating, default=None)
    p.add_argument("--transferee", default=None)

    p = sub.add_parser("soa", parents=[common], help="statement of applicability")
    p.add_argument("action", choices=["generate", "export"])
    p.add_argument(
        "--exclude-justification",
        action="append",
        type=_override,
        default=[],
        metavar="QUESTION_ID=TEXT",
        help="override the exclusion justification for a control (repeatable)",
    )

    p = sub.add_parser("pdca", parents=[common], help="lifecycle status and transitions")
    pdca_sub = p.add_subparsers(dest="action", metavar="action", required=True)
    pdca_sub.add_parser("status", parents=[common])
    pp = pdca_sub.add_parser("advance", parents=[common])
    pp.add_argument("--note", required=True)
    pp = pdca_sub.add_parser("evidence", parents=[common])
    pp.add_argument("--control", required=True)
    pp.add_argument("--not-implemented", action="store_true")
    pp.add_argument("--note", required=True)
    pp = pdca_sub.add_parser("review", parents=[common])
    pp.add_argument("--covers", action="append", default=[])
    pp.add_argument("--finding", action="append", default=[])
    pp.add_argument("--note", required=True)
    pp = pdca_sub.add_parser("action", parents=[common])
    pp.add_argument("--finding", required=True)
    pp.add_argument("--note", required=True)
    pp.add_argument("--defer", action="store_true")

    p = sub.add_parser("report", parents=[common], help="open above-threshold risks")
    p.add_argument("--strict", action="store_true", help="exit 3 if any above-threshold risk is untreated")

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--static", default=None, help="directory of workbench assets to serve at /")

    return parser


# -- rendering ----------------------------------------------------------------

def render_table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))).rstrip(),
    ]
    for row in cells:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def render_csv(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buffer.getvalue()


def render_markdown(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [
        "| " + " | ".join(headers) + " |",
        "| " + " | ".join("---" for _ in headers) + " |",
    ]
    for row in rows:
        lines.append("| " + " | ".join(str(v) for v in row) + " |")
    return "\n".join(lines) + "\n"


def render(fmt: str, headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    if fmt == "csv":
        return render_csv(headers, rows)
    if fmt == "md":
        return render_markdown(headers, rows)
    return render_table(headers, rows)


# -- command context ------------------------------------------------------------

class Ctx:
    def __init__(self, args: argparse.Namespace, stdin: IO, stdout: IO, stderr: IO):
        self.args = args
        self.stdin = stdin
        self.stdout = stdout
        self.stderr = stderr

    @property
    def now(self) -> datetime:
        return self.args.now or datetime.now(timezone.utc)

    def catalog_bytes(self):
        path = self.args.catalog or os.environ.get(CATALOG_ENV)
        if path == "-":
            return self.stdin.read()
        if path:
            return Path(path).read_bytes()
        return shipped_catalog_bytes()

    def catalog(self) -> Catalog:
        return load_catalog(self.catalog_bytes())

    def load(self, catalog: Catalog) -> reg.AssessmentRegister:
        path = Path(self.args.register)
        if not path.exists():
            raise DomainError(f"register file not found: {path}")
        return reg.load_register(path, catalog)

    def save(self, register: reg.AssessmentRegister) -> None:
        reg.save_register(register, self.args.register)

    def emit(self, text: str) -> None:
        if self.args.out:
            Path(self.args.out).write_text(text, encoding="utf-8")
        else:
            self.stdout.write(text)

    def info(self, message: str) -> None:
        self.stderr.write(message + "\n")


# -- command handlers -----------------------------------------------------------

def cmd_init(ctx: Ctx) -> int:
    path = Path(ctx.args.register)
    if path.exists():
        raise DomainError(f"register already exists: {path}")
    catalog = ctx.catalog()
    register = reg.create_register(ctx.args.scope, ctx.args.policy, ctx.args.threshold, catalog)
    ctx.save(register)
    ctx.info(f"initialized register {path} (revision 0, catalog {catalog.catalog_version})")
    return EXIT_OK


def cmd_catalog(ctx: Ctx) -> int:
    if ctx.args.action == "validate":
        catalog = parse_catalog(ctx.catalog_bytes())
        report = validate_catalog(catalog)
        rows = [(f.severity, f.kind, f.message) for f in report.findings]
        if rows:
            ctx.emit(render(ctx.args.format, ["severity", "kind", "message"], rows))
            ctx.info(f"catalog {catalog.catalog_version}: {len(rows)} finding(s)")
            return EXIT_DOMAIN
        ctx.info(f"catalog {catalog.catalog_version}: 0 findings")
        return EXIT_OK

    catalog = ctx.catalog()
    threats = catalog.threats
    if ctx.args.category:
        category = AssetCategory.parse(ctx.args.category)
        threats = tuple(t for t in threats if t.asset_category is category)
    rows = []
    for threat in threats:
        for vuln in threat.vulnerabilities:
            rows.append(
                (
                    threat.threat_id,
                    threat.asset_category.value,
                    threat.name,
                    vuln.vuln_id,
                    ";".join(vuln.control_refs),
                )
            )
    ctx.emit(render(ctx.args.format, ["threat_id", "category", "name", "vuln_id", "controls"], rows))
    return EXIT_OK


def cmd_asset(ctx: Ctx) -> int:
    catalog = ctx.catalog()
    register = ctx.load(catalog)
    if ctx.args.action == "add":
        asset_id = reg.add_asset(
            register,
            ctx.args.name,
            ctx.args.category,
            ctx.args.confidentiality,
            ctx.args.integrity,
            ctx.args.availability,
        )
        ctx.save(register)
        asset = register.asset(asset_id)
        ctx.info(f"added asset {asset_id} ({asset.name}), value {asset.asset_value.value}")
        ctx.emit(asset_id + "\n")
        return EXIT_OK
    if ctx.args.action == "rate":
        asset = reg.rate_asset(
            register,
            ctx.args.asset_id,
            ctx.args.confidentiality,
            ctx.args.integrity,
            ctx.args.availability,
        )
        ctx.save(register)
        ctx.info(f"re-rated asset {asset.asset_id}, value {asset.asset_value.value}")
        return EXIT_OK
    rows = [
        (
            a.asset_id,
            a.name,
            a.category.value,
            a.confidentiality.label,
            a.integrity.label,
            a.availability.label,
            a.asset_value.value,
        )
        for a in register.assets
    ]
    ctx.emit(render(ctx.args.format, ["asset_id", "name", "category", "C", "I", "A", "value"], rows))
    return EXIT_OK


def cmd_risk(ctx: Ctx) -> int:
    catalog = ctx.catalog()
    register = ctx.load(catalog)
    if ctx.args.action == "add":
        record = reg.instantiate_risk(
            register,
            catalog,
            ctx.args.asset,
            ctx.args.threat,
            ctx.args.threat_rating,
            ctx.args.vuln,
            ctx.args.vuln_rating,
        )
        ctx.save(register)
        ctx.info(
            f"added risk {record.risk_id}: value {record.risk_value.value}, "
            f"{record.classification.value}"
        )
        ctx.emit(record.risk_id + "\n")
        return EXIT_OK

    records = register.risks
    ordered = scoring.risk_matrix(records) if ctx.args.sort == "value" else sorted(
        records, key=lambda r: r.risk_id
    )
    rows = [
        (
            r.risk_id,
            r.asset_id,
            r.threat_id,
            r.vuln_id,
            r.threat_rating.label,
            r.vuln_rating.label,
            r.risk_value.value,
            r.classification.value,
            r.status.value,
        )
        for r in ordered
    ]
    headers = ["risk_id", "asset_id", "threat_id", "vuln_id", "T", "V", "value", "classification", "status"]
    ctx.emit(render(ctx.args.format, headers, rows))
    return EXIT_OK


def cmd_treat(ctx: Ctx) -> int:
    catalog = ctx.catalog()
    register = ctx.load(catalog)
    method = TreatmentMethod(ctx.args.method.capitalize())
    decision = treatment.apply_treatment(
        register,
        catalog,
        ctx.args.risk_id,
        method,
        ctx.args.justification,
        controls=ctx.args.control,
        residual_threat=ctx.args.residual_threat,
        residual_vuln=ctx.args.residual_vuln,
        transferee=ctx.args.transferee,
        now=ctx.now,
    )
    ctx.save(register)
    risk = register.risk(ctx.args.risk_id)
    ctx.info(
        f"recorded {decision.method.value} for {risk.risk_id}: "
        f"residual {decision.residual_risk}, status {risk.status.value}"
    )
    ctx.emit(decision.decision_id + "\n")
    return EXIT_OK


def cmd_soa(ctx: Ctx) -> int:
    catalog = ctx.catalog()
    register = ctx.load(catalog)
    overrides = dict(ctx.args.exclude_justification)
    if ctx.args.action == "generate":
        reg.record_soa_generated(register)
        soa = treatment.generate_soa(register, catalog, ctx.now, overrides)
        ctx.save(register)
        ctx.emit(json.dumps(treatment.soa_to_dict(soa), indent=2, ensure_ascii=False) + "\n")
        included = sum(1 for e in soa.entries if e.included)
        ctx.info(
            f"statement of applicability generated at revision {register.revision}: "
            f"{included} of {len(soa.entries)} controls included"
        )
        return EXIT_OK

    soa = treatment.generate_soa(register, catalog, ctx.now, overrides)
    if ctx.args.format == "md":
        ctx.emit(treatment.soa_to_markdown(soa, catalog))
    else:
        ctx.emit(treatment.soa_to_csv(soa))
    return EXIT_OK


def cmd_pdca(ctx: Ctx) -> int:
    catalog = ctx.catalog()
    register = ctx.load(catalog)
    if ctx.args.action == "status":
        items = pdca.required_artifacts(register, catalog)
        rows = [
            ("x" if item.satisfied else " ", item.item_id, item.description, item.detail)
            for item in items
        ]
        ctx.emit(f"phase: {register.pdca.phase.value}\niteration: {register.pdca.iteration}\n")
        ctx.emit(render(ctx.args.format, ["ok", "item", "description", "detail"], rows))
        return EXIT_OK
    if ctx.args.action == "advance":
        state = pdca.advance(register, catalog, ctx.args.note, ctx.now)
        ctx.save(register)
        ctx.info(f"advanced to {state.phase.value} (iteration {state.iteration})")
        ctx.emit(f"{state.phase.value}\n")
        return EXIT_OK
    if ctx.args.action == "evidence":
        pdca.record_implementation(
            register,
            ctx.args.control,
            not ctx.args.not_implemented,
            ctx.args.note,
            ctx.now,
        )
        ctx.save(register)
        ctx.info(f"recorded implementation evidence for {ctx.args.control}")
        return EXIT_OK
    if ctx.args.action == "review":
        review = pdca.record_review(register, ctx.args.covers, ctx.args.finding, ctx.args.note, ctx.now)
        ctx.save(register)
        ctx.info(
            f"recorded review {review.review_id} covering {len(review.controls_covered)} control(s), "
            f"{len(review.findings)} finding(s)"
        )
        for finding in review.findings:
            ctx.emit(finding.finding_id + "\n")
        return EXIT_OK
    pdca.record_corrective_action(register, ctx.args.finding, ctx.args.note, ctx.args.defer, ctx.now)
    ctx.save(register)
    ctx.info(f"recorded corrective action for {ctx.args.finding}")
    return EXIT_OK


def cmd_report(ctx: Ctx) -> int:
    catalog = ctx.catalog()
    register = ctx.load(catalog)
    entries = treatment.coverage_report(register)
    rows = [(e.risk_id, e.asset_id, e.threat_id, e.vuln_id, e.risk_value) for e in entries]
    ctx.emit(render(ctx.args.format, ["risk_id", "asset_id", "threat_id", "vuln_id", "value"], rows))
    ctx.info(f"untreated above-threshold risks: {len(entries)}")
    if ctx.args.strict and entries:
        return EXIT_STRICT
    return EXIT_OK


def cmd_serve(ctx: Ctx) -> int:
    import uvicorn

    from .service import create_app

    catalog = ctx.catalog()
    app = create_app(Path(ctx.args.register), catalog, static_dir=ctx.args.static)
    ctx.info(f"serving register {ctx.args.register} on {ctx.args.bind}:{ctx.args.port}")
    uvicorn.run(app, host=ctx.args.bind, port=ctx.args.port, log_level="warning")
    return EXIT_OK


_HANDLERS = {
    "init": cmd_init,
    "catalog": cmd_catalog,
    "asset": cmd_asset,
    "risk": cmd_risk,
    "treat": cmd_treat,
    "soa": cmd_soa,
    "pdca": cmd_pdca,
    "report": cmd_report,
    "serve": cmd_serve,
}


def run(argv: Sequence[str], stdout: IO = None, stderr: IO = None, stdin: IO = None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(list(argv))
    except UsageError as exc:
        stderr.write(exc.parser.format_usage())
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help prints and exits 0
        return int(exc.code or 0)

    if not args.command:
        stderr.write(parser.format_usage())
        stderr.write("error: a command is required\n")
        return EXIT_USAGE

    try:
        return _HANDLERS[args.command](Ctx(args, stdin, stdout, stderr))
    except DomainError as exc:
        stderr.write(f"error[{exc.code}]: {exc}\n")
        return EXIT_DOMAIN
    except FileNotFoundError as exc:
        stderr.write(f"error: file not found: {exc.filename}\n")
        return EXIT_DOMAIN


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))
