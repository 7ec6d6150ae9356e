"""Asset valuation, risk valuation, and classification.

All arithmetic is exact integer arithmetic on a three-level ordinal scale;
no floating point is used anywhere so results are deterministic and
auditable. Asset value is the sum of the three protection-goal ratings
(range 3..9); risk value is asset value times threat rating times
vulnerability rating (range 3..81). A risk requires treatment when its
value is strictly above the organizational acceptance threshold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence


class Rating(enum.Enum):
    """Three-level ordinal rating: Low=1, Medium=2, High=3."""

    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @property
    def numeric(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def from_numeric(cls, n: int) -> "Rating":
        if n not in (1, 2, 3):
            raise ValueError(f"rating numeric must be 1, 2 or 3, got {n!r}")
        return cls(n)

    @classmethod
    def parse(cls, text: str) -> "Rating":
        """Accepts 'Low'/'Medium'/'High' (any case) or '1'/'2'/'3'."""
        t = text.strip()
        if t.isdigit():
            return cls.from_numeric(int(t))
        try:
            return cls[t.upper()]
        except KeyError:
            raise ValueError(f"not a rating: {text!r}") from None


class Classification(enum.Enum):
    ACCEPTABLE = "Acceptable"
    REQUIRES_TREATMENT = "RequiresTreatment"


@dataclass(frozen=True)
class AssetValue:
    """Sum of confidentiality, integrity and availability ratings (3..9)."""

    value: int

    def __post_init__(self) -> None:
        if not 3 <= self.value <= 9:
            raise ValueError(f"asset value must be in 3..9, got {self.value}")


@dataclass(frozen=True)
class RiskValue:
    """Product of asset value, threat rating and vulnerability rating (3..81)."""

    value: int

    def __post_init__(self) -> None:
        if not 3 <= self.value <= 81:
            raise ValueError(f"risk value must be in 3..81, got {self.value}")


@dataclass(frozen=True)
class AcceptanceThreshold:
    """Organizational risk acceptance level; risks strictly above it need treatment."""

    threshold: int

    def __post_init__(self) -> None:
        if not 3 <= self.threshold <= 81:
            raise ValueError(f"threshold must be in 3..81, got {self.threshold}")


#: Default acceptance level used when a register does not set one explicitly.
#: A convention (the cube of the medium rating), configurable per register.
DEFAULT_THRESHOLD = AcceptanceThreshold(27)


def asset_value(confidentiality: Rating, integrity: Rating, availability: Rating) -> AssetValue:
    """Value an asset as the sum of its three protection-goal ratings."""
    return AssetValue(confidentiality.numeric + integrity.numeric + availability.numeric)


def risk_value(asset: AssetValue, threat: Rating, vulnerability: Rating) -> RiskValue:
    """Score a risk as asset value times threat rating times vulnerability rating."""
    return RiskValue(asset.value * threat.numeric * vulnerability.numeric)


def classify(risk: RiskValue, threshold: AcceptanceThreshold) -> Classification:
    """Strictly-above semantics: a risk equal to the threshold is acceptable."""
    if risk.value > threshold.threshold:
        return Classification.REQUIRES_TREATMENT
    return Classification.ACCEPTABLE


def risk_matrix(risks: Iterable) -> list:
    """Order risk records for presentation: value descending, ties by asset id
    then threat id (lexicographic). Deterministic for any input permutation.

    Accepts any records exposing ``risk_value`` (RiskValue), ``asset_id`` and
    ``threat_id``.
    """
    return sorted(risks, key=lambda r: (-r.risk_value.value, r.asset_id, r.threat_id))


def matrix_rows(risks: Sequence) -> list[tuple[str, str, str, int, str]]:
    """Flat (risk_id, asset_id, threat_id, value, classification) rows in matrix order."""
    return [
        (r.risk_id, r.asset_id, r.threat_id, r.risk_value.value, r.classification.value)
        for r in risk_matrix(risks)
    ]
