"""Scoring arithmetic against an independent brute-force oracle."""

import itertools

import pytest
from hypothesis import given, strategies as st

from lanrisk.scoring import (
    AcceptanceThreshold,
    AssetValue,
    Classification,
    Rating,
    RiskValue,
    asset_value,
    classify,
    risk_matrix,
    risk_value,
)


def brute_force(c: int, i: int, a: int, t: int, v: int) -> int:
    # The oracle: sum the three protection goals, multiply by threat and
    # vulnerability. Kept deliberately separate from the engine path.
    return (c + i + a) * t * v


LEVELS = (1, 2, 3)


def engine(c, i, a, t, v) -> int:
    return risk_value(
        asset_value(Rating.from_numeric(c), Rating.from_numeric(i), Rating.from_numeric(a)),
        Rating.from_numeric(t),
        Rating.from_numeric(v),
    ).value


class TestOracle:
    def test_all_243_combinations_match_brute_force(self):
        for combo in itertools.product(LEVELS, repeat=5):
            assert engine(*combo) == brute_force(*combo), combo

    def test_bounds_attained_exactly_once(self):
        values = [engine(*combo) for combo in itertools.product(LEVELS, repeat=5)]
        assert min(values) == 3
        assert max(values) == 81
        assert values.count(3) == 1
        assert values.count(81) == 1
        assert engine(1, 1, 1, 1, 1) == 3
        assert engine(3, 3, 3, 3, 3) == 81


class TestAssetValue:
    def test_all_low_floor(self):
        assert asset_value(Rating.LOW, Rating.LOW, Rating.LOW).value == 3

    def test_all_high_ceiling(self):
        assert asset_value(Rating.HIGH, Rating.HIGH, Rating.HIGH).value == 9

    def test_direct_sum(self):
        assert asset_value(Rating.MEDIUM, Rating.LOW, Rating.HIGH).value == 6

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            AssetValue(2)
        with pytest.raises(ValueError):
            AssetValue(10)


class TestRiskValue:
    def test_minimum(self):
        assert risk_value(AssetValue(3), Rating.LOW, Rating.LOW).value == 3

    def test_maximum(self):
        assert risk_value(AssetValue(9), Rating.HIGH, Rating.HIGH).value == 81

    def test_direct_product(self):
        assert risk_value(AssetValue(6), Rating.MEDIUM, Rating.HIGH).value == 36

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            RiskValue(2)
        with pytest.raises(ValueError):
            RiskValue(82)


class TestClassify:
    def test_above_threshold_requires_treatment(self):
        assert classify(RiskValue(36), AcceptanceThreshold(27)) is Classification.REQUIRES_TREATMENT

    def test_boundary_equality_is_acceptable(self):
        assert classify(RiskValue(27), AcceptanceThreshold(27)) is Classification.ACCEPTABLE

    def test_below_threshold_acceptable(self):
        assert classify(RiskValue(3), AcceptanceThreshold(27)) is Classification.ACCEPTABLE

    @given(
        st.integers(min_value=3, max_value=81),
        st.integers(min_value=3, max_value=80),
        st.integers(min_value=1, max_value=78),
    )
    def test_monotone_in_risk_value(self, threshold, value, bump):
        higher = min(81, value + bump)
        t = AcceptanceThreshold(threshold)
        if classify(RiskValue(value), t) is Classification.REQUIRES_TREATMENT:
            assert classify(RiskValue(higher), t) is Classification.REQUIRES_TREATMENT


rating_numeric = st.integers(min_value=1, max_value=3)


@given(rating_numeric, rating_numeric, rating_numeric, rating_numeric, rating_numeric)
def test_raising_any_single_rating_never_decreases(c, i, a, t, v):
    base = engine(c, i, a, t, v)
    for index in range(5):
        combo = [c, i, a, t, v]
        if combo[index] < 3:
            combo[index] += 1
            assert engine(*combo) >= base


class TestRating:
    def test_bijection(self):
        for n, level in ((1, Rating.LOW), (2, Rating.MEDIUM), (3, Rating.HIGH)):
            assert Rating.from_numeric(n) is level
            assert level.numeric == n

    def test_parse_accepts_names_and_digits(self):
        assert Rating.parse("low") is Rating.LOW
        assert Rating.parse("Medium") is Rating.MEDIUM
        assert Rating.parse("HIGH") is Rating.HIGH
        assert Rating.parse("2") is Rating.MEDIUM

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            Rating.parse("severe")
        with pytest.raises(ValueError):
            Rating.from_numeric(0)


class FakeRecord:
    def __init__(self, risk_id, asset_id, threat_id, value):
        self.risk_id = risk_id
        self.asset_id = asset_id
        self.threat_id = threat_id
        self.risk_value = RiskValue(value)
        self.classification = Classification.ACCEPTABLE


class TestRiskMatrix:
    def test_empty(self):
        assert risk_matrix([]) == []

    def test_value_descending_with_id_tiebreak(self):
        records = [
            FakeRecord("r-1", "a-2", "t-b", 12),
            FakeRecord("r-2", "a-1", "t-a", 81),
            FakeRecord("r-3", "a-1", "t-b", 12),
        ]
        ordered = risk_matrix(records)
        assert [r.risk_value.value for r in ordered] == [81, 12, 12]
        # tie broken by asset id then threat id
        assert [r.risk_id for r in ordered] == ["r-2", "r-3", "r-1"]

    @given(st.permutations(range(6)))
    def test_permutation_invariance(self, order):
        base = [
            FakeRecord("r-1", "a-1", "t-a", 40),
            FakeRecord("r-2", "a-1", "t-b", 40),
            FakeRecord("r-3", "a-2", "t-a", 40),
            FakeRecord("r-4", "a-1", "t-a", 12),
            FakeRecord("r-5", "a-3", "t-c", 81),
            FakeRecord("r-6", "a-2", "t-b", 3),
        ]
        shuffled = [base[i] for i in order]
        assert [r.risk_id for r in risk_matrix(shuffled)] == [
            r.risk_id for r in risk_matrix(base)
        ]
