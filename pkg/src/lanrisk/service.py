"""Local HTTP API over one register file.

Every JSON response is an envelope ``{payload | error, register_revision}``.
Mutations require ``If-Match: <revision>`` and are serialized through one
writer lock; the register file is persisted atomically (write temp, then
rename) only after the operation succeeds, so a failed request never
changes the file. Binds to loopback by default; this is a single-assessor
desk tool with no authentication.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import pdca, register as reg, scoring, treatment
from .catalog import AssetCategory, Catalog, catalog_to_dict, query_threats
from .errors import (
    AlreadyDecided,
    AlreadyOpen,
    CatalogMismatch,
    DomainError,
    DuplicateName,
    DuplicateRisk,
    PhaseIncomplete,
    UnknownAsset,
    UnknownFinding,
    UnknownRisk,
    UnknownThreat,
    UnknownVulnerability,
    WrongPhase,
)
from .model import TreatmentMethod
from .scoring import Rating

API = "/api/v1"

_CONFLICTS = (
    AlreadyDecided,
    AlreadyOpen,
    CatalogMismatch,
    DuplicateName,
    DuplicateRisk,
    PhaseIncomplete,
    WrongPhase,
)
_NOT_FOUND = (UnknownAsset, UnknownRisk, UnknownThreat, UnknownVulnerability, UnknownFinding)


class BadBody(Exception):
    """Request body is missing, unparseable, or missing required fields."""


class RevisionMismatch(Exception):
    def __init__(self, supplied, current: int):
        super().__init__(f"If-Match {supplied!r} does not match register revision {current}")


def _status_for(exc: DomainError) -> int:
    if isinstance(exc, _NOT_FOUND):
        return 404
    if isinstance(exc, _CONFLICTS):
        return 409
    return 422


def _rating_field(body: dict, key: str, required: bool = True) -> Rating | None:
    if key not in body or body[key] is None:
        if required:
            raise BadBody(f"missing field {key!r}")
        return None
    try:
        return Rating.parse(str(body[key]))
    except ValueError as exc:
        raise DomainError(str(exc)) from None


def _str_field(body: dict, key: str, required: bool = True) -> str | None:
    if key not in body or body[key] is None:
        if required:
            raise BadBody(f"missing field {key!r}")
        return None
    if not isinstance(body[key], str):
        raise BadBody(f"field {key!r} must be a string")
    return body[key]


class RegisterService:
    """Owns the register value and its file; all writes go through ``mutate``."""

    def __init__(self, path: Path, catalog: Catalog):
        self.path = path
        self.catalog = catalog
        self.register = reg.load_register_file(path, catalog)
        self.lock = threading.Lock()

    @property
    def revision(self) -> int:
        return self.register.revision

    def check_if_match(self, request: Request) -> None:
        header = request.headers.get("if-match")
        if header is None:
            raise BadBody("mutations require the If-Match header")
        try:
            supplied = int(header.strip().strip('"'))
        except ValueError:
            raise BadBody(f"If-Match must be an integer revision, got {header!r}") from None
        if supplied != self.register.revision:
            raise RevisionMismatch(supplied, self.register.revision)

    def persist(self) -> None:
        reg.save_register(self.register, self.path)


def create_app(register_path: Path, catalog: Catalog, static_dir: str | None = None) -> FastAPI:
    service = RegisterService(Path(register_path), catalog)
    app = FastAPI(title="lanrisk", docs_url=None, redoc_url=None)
    app.state.service = service

    def ok(payload, status: int = 200) -> JSONResponse:
        return JSONResponse(
            {"payload": payload, "register_revision": service.revision}, status_code=status
        )

    def fail(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(
            {
                "error": {"code": code, "message": message},
                "register_revision": service.revision,
            },
            status_code=status,
        )

    @app.exception_handler(DomainError)
    async def on_domain_error(_request, exc: DomainError):
        return fail(_status_for(exc), exc.code, str(exc))

    @app.exception_handler(BadBody)
    async def on_bad_body(_request, exc: BadBody):
        return fail(400, "MalformedBody", str(exc))

    @app.exception_handler(RevisionMismatch)
    async def on_revision_mismatch(_request, exc: RevisionMismatch):
        return fail(409, "RevisionMismatch", str(exc))

    async def body_of(request: Request) -> dict:
        try:
            data = await request.json()
        except Exception:
            raise BadBody("request body must be a JSON object") from None
        if not isinstance(data, dict):
            raise BadBody("request body must be a JSON object")
        return data

    def mutate(request: Request, operation):
        """Serialize the write, run it, persist atomically, return payload."""
        with service.lock:
            service.check_if_match(request)
            payload = operation()
            service.persist()
            return payload

    def register_doc() -> dict:
        return reg.register_to_dict(service.register)

    # -- register ------------------------------------------------------------

    @app.get(API + "/register")
    async def get_register():
        return ok(register_doc())

    @app.put(API + "/register/scope")
    async def put_scope(request: Request):
        body = await body_of(request)
        scope = _str_field(body, "scope")

        def op():
            reg.set_scope(service.register, scope)
            return {"scope_statement": service.register.scope_statement}

        return ok(mutate(request, op))

    @app.put(API + "/register/policy")
    async def put_policy(request: Request):
        body = await body_of(request)
        policy = _str_field(body, "policy")

        def op():
            reg.set_policy(service.register, policy)
            return {"policy_statement": service.register.policy_statement}

        return ok(mutate(request, op))

    @app.put(API + "/register/threshold")
    async def put_threshold(request: Request):
        body = await body_of(request)
        if "threshold" not in body or type(body["threshold"]) is not int:
            raise BadBody("field 'threshold' must be an integer")

        def op():
            reg.set_threshold(service.register, body["threshold"])
            return {"acceptance_threshold": service.register.acceptance_threshold.threshold}

        return ok(mutate(request, op))

    # -- assets ----------------------------------------------------------------

    @app.get(API + "/assets")
    async def get_assets():
        return ok(register_doc()["assets"])

    @app.post(API + "/assets")
    async def post_asset(request: Request):
        body = await body_of(request)
        name = _str_field(body, "name")
        category = _str_field(body, "category")
        c = _rating_field(body, "confidentiality")
        i = _rating_field(body, "integrity")
        a = _rating_field(body, "availability")

        def op():
            asset_id = reg.add_asset(service.register, name, category, c, i, a)
            doc = register_doc()
            return next(x for x in doc["assets"] if x["asset_id"] == asset_id)

        return ok(mutate(request, op), status=201)

    @app.put(API + "/assets/{asset_id}/ratings")
    async def put_ratings(asset_id: str, request: Request):
        body = await body_of(request)
        c = _rating_field(body, "confidentiality")
        i = _rating_field(body, "integrity")
        a = _rating_field(body, "availability")

        def op():
            reg.rate_asset(service.register, asset_id, c, i, a)
            doc = register_doc()
            return next(x for x in doc["assets"] if x["asset_id"] == asset_id)

        return ok(mutate(request, op))

    # -- risks -------------------------------------------------------------------

    def risk_rows() -> list[dict]:
        doc = register_doc()
        by_id = {r["risk_id"]: r for r in doc["risks"]}
        ordered = scoring.risk_matrix(service.register.risks)
        return [by_id[r.risk_id] for r in ordered]

    @app.get(API + "/risks")
    async def get_risks():
        return ok(risk_rows())

    @app.post(API + "/risks")
    async def post_risk(request: Request):
        body = await body_of(request)
        asset_id = _str_field(body, "asset_id")
        threat_id = _str_field(body, "threat_id")
        vuln_id = _str_field(body, "vuln_id")
        threat_rating = _rating_field(body, "threat_rating")
        vuln_rating = _rating_field(body, "vuln_rating")

        def op():
            record = reg.instantiate_risk(
                service.register, service.catalog, asset_id, threat_id, threat_rating, vuln_id, vuln_rating
            )
            doc = register_doc()
            return next(x for x in doc["risks"] if x["risk_id"] == record.risk_id)

        return ok(mutate(request, op), status=201)

    @app.post(API + "/risks/{risk_id}/treatment")
    async def post_treatment(risk_id: str, request: Request):
        body = await body_of(request)
        method_text = _str_field(body, "method")
        try:
            method = TreatmentMethod(method_text.capitalize())
        except ValueError:
            raise DomainError(f"unknown treatment method: {method_text!r}") from None
        justification = _str_field(body, "justification")
        controls = body.get("controls", [])
        if not isinstance(controls, list) or not all(isinstance(x, str) for x in controls):
            raise BadBody("field 'controls' must be a list of strings")

        def op():
            decision = treatment.apply_treatment(
                service.register,
                service.catalog,
                risk_id,
                method,
                justification,
                controls=controls,
                residual_threat=_rating_field(body, "residual_threat", required=False),
                residual_vuln=_rating_field(body, "residual_vuln", required=False),
                transferee=_str_field(body, "transferee", required=False),
                now=datetime.now(timezone.utc),
            )
            doc = register_doc()
            return {
                "decision": next(d for d in doc["treatments"] if d["decision_id"] == decision.decision_id),
                "risk": next(r for r in doc["risks"] if r["risk_id"] == risk_id),
            }

        return ok(mutate(request, op), status=201)

    # -- statement of applicability ---------------------------------------------

    @app.get(API + "/soa")
    async def get_soa():
        soa = treatment.generate_soa(service.register, service.catalog, datetime.now(timezone.utc))
        return ok(treatment.soa_to_dict(soa))

    @app.post(API + "/soa/generate")
    async def post_soa_generate(request: Request):
        def op():
            reg.record_soa_generated(service.register)
            soa = treatment.generate_soa(service.register, service.catalog, datetime.now(timezone.utc))
            return treatment.soa_to_dict(soa)

        return ok(mutate(request, op))

    @app.get(API + "/soa/export")
    async def get_soa_export(format: str = "csv"):
        if format not in ("csv", "md"):
            raise DomainError(f"unsupported export format: {format!r}")
        soa = treatment.generate_soa(service.register, service.catalog, datetime.now(timezone.utc))
        if format == "csv":
            text, media = treatment.soa_to_csv(soa), "text/csv"
        else:
            text, media = treatment.soa_to_markdown(soa, service.catalog), "text/markdown"
        return PlainTextResponse(
            text, media_type=media, headers={"X-Register-Revision": str(service.revision)}
        )

    # -- pdca ----------------------------------------------------------------------

    @app.get(API + "/pdca")
    async def get_pdca():
        items = pdca.required_artifacts(service.register, service.catalog)
        ok_flag, _missing = pdca.can_advance(service.register, service.catalog)
        payload = register_doc()["pdca"]
        payload["checklist_items"] = [
            {
                "item_id": item.item_id,
                "description": item.description,
                "satisfied": item.satisfied,
                "detail": item.detail,
            }
            for item in items
        ]
        payload["can_advance"] = ok_flag
        return ok(payload)

    @app.post(API + "/pdca/advance")
    async def post_advance(request: Request):
        body = await body_of(request)
        note = _str_field(body, "note")

        def op():
            state = pdca.advance(service.register, service.catalog, note, datetime.now(timezone.utc))
            return {"phase": state.phase.value, "iteration": state.iteration}

        return ok(mutate(request, op))

    # -- catalog ---------------------------------------------------------------------

    @app.get(API + "/catalog/domains")
    async def get_domains():
        return ok(catalog_to_dict(service.catalog)["domains"])

    @app.get(API + "/catalog/threats")
    async def get_threats(category: str | None = None):
        doc = catalog_to_dict(service.catalog)
        threats = doc["threats"]
        if category is not None:
            AssetCategory.parse(category)  # raises UnknownCategory -> 422
            threats = [t for t in threats if t["asset_category"] == category]
        return ok(threats)

    @app.get(API + "/catalog/threats/{threat_id}/vulnerabilities")
    async def get_vulnerabilities(threat_id: str):
        threat = service.catalog.threat(threat_id)
        doc = catalog_to_dict(service.catalog)
        raw = next(t for t in doc["threats"] if t["threat_id"] == threat.threat_id)
        return ok(raw["vulnerabilities"])

    # -- workbench assets --------------------------------------------------------------

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="workbench")
    else:

        @app.get("/", response_class=HTMLResponse)
        async def index():
            return (
                "<!doctype html><title>lanrisk</title>"
                "<h1>lanrisk service</h1>"
                f"<p>API at {API}. Workbench assets not found; build the frontend "
                "and restart with --static pointing at its dist directory.</p>"
            )

    return app
