"""Error taxonomy shared by every module.

Each error carries a stable ``code`` (its class name) so the CLI and the
HTTP service can surface machine-readable error identifiers without string
matching on messages.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for all validation and domain-rule failures."""

    @property
    def code(self) -> str:
        return type(self).__name__


# -- catalog loading -----------------------------------------------------

class MalformedDocument(DomainError):
    """Input is not a syntactically valid document."""


class SchemaViolation(DomainError):
    """Document parses but breaks the schema (missing/unknown field, wrong type, bad range)."""


class DanglingReference(DomainError):
    """A control or technique reference does not resolve."""


class DuplicateId(DomainError):
    """An identifier occurs more than once."""


class UnknownCategory(DomainError):
    """Asset category is not one of the defined categories."""


class UnknownThreat(DomainError):
    pass


class UnknownVulnerability(DomainError):
    pass


# -- register ------------------------------------------------------------

class EmptyScope(DomainError):
    pass


class EmptyPolicy(DomainError):
    pass


class WrongPhase(DomainError):
    """Mutation attempted outside the lifecycle phase that permits it."""


class EmptyName(DomainError):
    pass


class DuplicateName(DomainError):
    pass


class UnknownAsset(DomainError):
    pass


class CategoryMismatch(DomainError):
    """Threat category does not match the asset's category."""


class DuplicateRisk(DomainError):
    """The (asset, threat, vulnerability) triple is already registered."""


class DependentRisks(DomainError):
    """Asset still referenced by risk records; deletion refused."""


class TamperedDerivedField(DomainError):
    """A stored derived value disagrees with recomputation from primary fields."""


class CatalogMismatch(DomainError):
    """Register was built against a different catalog version."""


# -- treatment -----------------------------------------------------------

class UnknownRisk(DomainError):
    pass


class AlreadyDecided(DomainError):
    """Risk is not Open; a treatment decision already exists."""


class AlreadyOpen(DomainError):
    """Reopen requested on a risk that is already open."""


class MissingControls(DomainError):
    """Limitation requires at least one selected control."""


class ControlNotApplicable(DomainError):
    """Selected control is not mapped to the risk's threat/vulnerability."""


class ResidualExceedsOriginal(DomainError):
    """Residual rating higher than the original rating."""


class MissingTransferee(DomainError):
    """Transfer requires the receiving party."""


class EmptyJustification(DomainError):
    pass


class InvalidTreatmentOptions(DomainError):
    """Options supplied that the chosen treatment method does not take."""


# -- pdca ----------------------------------------------------------------

class PhaseIncomplete(DomainError):
    """Current phase checklist is not fully satisfied."""


class EmptyNote(DomainError):
    pass


class ControlNotIncluded(DomainError):
    """Implementation evidence only applies to controls included in the statement of applicability."""


class UnknownFinding(DomainError):
    pass
