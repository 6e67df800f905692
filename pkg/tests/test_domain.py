import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crceval.domain import (
    CRITERIA,
    CRITERION_KEYS,
    QualityVector,
    check_rank_law,
    tie_average_ranks,
    validate_quality_vector,
)


def full_vector(value=5.0, **overrides):
    scores = {k: value for k in CRITERION_KEYS}
    scores.update(overrides)
    return QualityVector(scores)


class TestValidateQualityVector:
    def test_all_ten_is_ok(self):
        assert validate_quality_vector(full_vector(10.0)) == []

    def test_below_range(self):
        violations = validate_quality_vector(full_vector(5.0, C3=0.0))
        assert violations == ["C3 below 1"]

    def test_missing_criterion(self):
        scores = {k: 5.0 for k in CRITERION_KEYS if k != "C9"}
        assert validate_quality_vector(QualityVector(scores)) == ["C9 missing"]

    def test_above_range(self):
        assert "C1 above 10" in validate_quality_vector(full_vector(5.0, C1=11.0))

    @given(st.lists(st.floats(min_value=0.0, max_value=12.0), min_size=9, max_size=9))
    def test_ok_iff_all_in_range(self, values):
        vector = QualityVector.from_list(values)
        in_range = all(1.0 <= s <= 10.0 for s in vector.as_list())
        assert (validate_quality_vector(vector) == []) == in_range


class TestQualityVector:
    def test_one_decimal_storage(self):
        assert full_vector(5.0, C1=7.449)["C1"] == 7.4

    def test_clamped(self):
        vector = QualityVector.clamped({**{k: 5 for k in CRITERION_KEYS}, "C2": 15, "C3": -3})
        assert vector["C2"] == 10.0
        assert vector["C3"] == 1.0

    def test_mean_is_unweighted(self):
        vector = QualityVector.from_list([1, 2, 3, 4, 5, 6, 7, 8, 9])
        assert vector.mean() == 5.0


class TestCriteria:
    def test_exactly_nine_in_fixed_order(self):
        assert [c.name for c in CRITERIA] == [
            "Readability",
            "Relevance",
            "Explanation Clarity",
            "Problem Identification",
            "Actionability",
            "Completeness",
            "Specificity",
            "Contextual Adequacy",
            "Brevity",
        ]


class TestTieAverageRanks:
    def test_two_way_tie(self):
        assert tie_average_ranks([("A", 10), ("B", 10), ("C", 8)]) == {
            "A": 1.5,
            "B": 1.5,
            "C": 3.0,
        }

    def test_three_way_tie_for_second(self):
        ranks = tie_average_ranks([("A", 9), ("B", 7), ("C", 7), ("D", 7), ("E", 5)])
        assert ranks == {"A": 1.0, "B": 3.0, "C": 3.0, "D": 3.0, "E": 5.0}

    def test_singleton(self):
        assert tie_average_ranks([("A", 4)]) == {"A": 1.0}

    def test_empty_is_error(self):
        with pytest.raises(ValueError, match="no models"):
            tie_average_ranks([])

    def test_non_finite_is_error(self):
        with pytest.raises(ValueError):
            tie_average_ranks([("A", float("nan"))])

    @given(
        st.lists(
            st.tuples(st.integers(0, 7), st.integers(0, 5)),
            min_size=1,
            max_size=8,
            unique_by=lambda t: t[0],
        ),
        st.randoms(use_true_random=False),
    )
    def test_permutation_invariant_and_rank_sum(self, entries, rng):
        ordering = [(f"m{i}", float(q)) for i, q in entries]
        ranks = tie_average_ranks(ordering)
        m = len(ordering)
        assert sum(ranks.values()) == pytest.approx(m * (m + 1) / 2)
        assert all(r >= 1 for r in ranks.values())
        assert check_rank_law(ranks)
        shuffled = list(ordering)
        rng.shuffle(shuffled)
        assert tie_average_ranks(shuffled) == ranks

    def test_rank_sum_brute_force_all_m_up_to_8(self):
        rng = random.Random(9)
        for m in range(1, 9):
            for _ in range(50):
                ordering = [(f"m{i}", float(rng.randint(0, 4))) for i in range(m)]
                ranks = tie_average_ranks(ordering)
                assert abs(sum(ranks.values()) - m * (m + 1) / 2) < 1e-9

    def test_higher_quality_smaller_rank(self):
        ranks = tie_average_ranks([("lo", 1.0), ("hi", 9.0)])
        assert ranks["hi"] < ranks["lo"]
