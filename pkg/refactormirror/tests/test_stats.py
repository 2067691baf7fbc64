from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.stats import rankdata

from refactormirror.errors import DegenerateInput
from refactormirror.stats import (
    cliffs_delta,
    fleiss_kappa,
    point_biserial,
    ratings_table,
    wilcoxon_signed_rank,
)


def _brute_force_p(pairs, alternative):
    """Signed-rank p-value by enumerating every sign assignment of the ranks."""
    d = [a - b for a, b in pairs if a != b]
    ranks = rankdata([abs(x) for x in d])
    observed = sum(r for r, x in zip(ranks, d) if x > 0)
    assignments = list(product([0, 1], repeat=len(d)))
    sums = [sum(r for r, s in zip(ranks, signs) if s) for signs in assignments]
    greater = Fraction(sum(1 for s in sums if s >= observed - 1e-9), len(sums))
    less = Fraction(sum(1 for s in sums if s <= observed + 1e-9), len(sums))
    if alternative == "greater":
        return float(greater)
    if alternative == "less":
        return float(less)
    return min(1.0, 2 * float(min(greater, less)))


@pytest.mark.parametrize("alternative", ["two-sided", "greater", "less"])
@pytest.mark.parametrize("pairs", [
    [(3, 1), (5, 2), (4, 4), (2, 3), (8, 1), (6, 5)],
    [(1, 0), (1, 0), (0, 1), (1, 0), (1, 1), (1, 0), (0, 0)],
    [(2.5, 1.0), (1.0, 2.5), (7.0, 3.0), (3.0, 7.0), (4.0, 1.0)],
    [(10, 1), (9, 2), (8, 3), (7, 4), (6, 5), (5, 6), (4, 7), (3, 8)],
    [(12, 3), (7, 9), (15, 4), (6, 7), (9, 5), (10, 4), (2, 5), (11, 3), (8, 3), (9, 2)],
    [(5, 1), (2, 4), (7, 3), (6, 6), (4, 3), (3, 4), (8, 5), (9, 4), (1, 3), (10, 4), (6, 4), (2, 5), (9, 2)],
], ids=["n6", "n5-ties", "n4-floats", "n8-ties", "n10", "n12-ties"])
def test_exact_wilcoxon_matches_enumeration(pairs, alternative):
    result = wilcoxon_signed_rank(pairs, alternative)
    assert result.detail["method"] == "exact"
    assert result.value == pytest.approx(_brute_force_p(pairs, alternative))


def test_wilcoxon_all_positive_five():
    result = wilcoxon_signed_rank([(1, 0)] * 5, "greater")
    assert result.value == pytest.approx(1 / 32)
    assert result.detail["w_plus"] == 15.0


def test_wilcoxon_without_differences_is_one():
    result = wilcoxon_signed_rank([(1, 1), (0, 0), (3, 3)])
    assert result.value == 1.0
    assert result.sizes == [3, 0]


def test_wilcoxon_switches_to_normal_approximation():
    pairs = [(k + 2, 1) for k in range(25)]
    result = wilcoxon_signed_rank(pairs, "greater")
    assert result.detail["method"] == "normal"
    assert result.value < 1e-4
    assert wilcoxon_signed_rank(pairs, "less").value > 0.999


def test_cliffs_delta_extremes_and_zero():
    assert cliffs_delta([4, 5], [1, 2]).value == 1.0
    assert cliffs_delta([1, 2], [4, 5]).value == -1.0
    same = cliffs_delta([1, 2, 3], [1, 2, 3])
    assert same.value == 0.0
    assert same.detail["magnitude"] == "negligible"
    with pytest.raises(DegenerateInput):
        cliffs_delta([], [1])


def test_cliffs_delta_matches_pair_counting():
    a, b = [1, 3, 3, 7], [2, 3, 5]
    expected = sum(np.sign(x - y) for x in a for y in b) / (len(a) * len(b))
    assert cliffs_delta(a, b).value == pytest.approx(expected)


def test_fleiss_kappa_reference_table():
    table = [
        [0, 0, 0, 0, 14], [0, 2, 6, 4, 2], [0, 0, 3, 5, 6], [0, 3, 9, 2, 0], [2, 2, 8, 1, 1],
        [7, 7, 0, 0, 0], [3, 2, 6, 3, 0], [2, 5, 3, 2, 2], [6, 5, 2, 1, 0], [0, 2, 2, 3, 7],
    ]
    assert fleiss_kappa(table).value == pytest.approx(0.210, abs=1e-3)


def test_fleiss_kappa_perfect_agreement():
    assert fleiss_kappa(ratings_table([[3, 3, 3], [4, 4, 4], [2, 2, 2]])).value == pytest.approx(1.0)
    assert fleiss_kappa(ratings_table([[3, 3, 3], [3, 3, 3]])).value == 1.0


def test_fleiss_kappa_rejects_bad_tables():
    with pytest.raises(DegenerateInput):
        fleiss_kappa([[3, 0], [2, 0]])
    with pytest.raises(DegenerateInput):
        fleiss_kappa([[1, 0], [0, 1]])
    with pytest.raises(DegenerateInput):
        fleiss_kappa([])


def test_ratings_table_counts_scores():
    assert ratings_table([[0, 4, 4], [3, 2, 3]]) == [[1, 0, 0, 0, 2], [0, 0, 1, 2, 0]]


def test_point_biserial_perfect_negative():
    result = point_biserial([1, 1, 9, 9], [True, True, False, False])
    assert result.value == pytest.approx(-1.0)
    assert result.sizes == [4, 2]


def test_point_biserial_constant_input_is_degenerate():
    with pytest.raises(DegenerateInput):
        point_biserial([5, 5, 5], [True, False, True])
    with pytest.raises(DegenerateInput):
        point_biserial([1, 2, 3], [True, True, True])
    with pytest.raises(DegenerateInput):
        point_biserial([1, 2], [True])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 500), st.booleans()), min_size=2, max_size=12))
def test_point_biserial_matches_the_direct_formula(sample):
    loc = [x for x, _ in sample]
    success = [s for _, s in sample]
    assume(len(set(loc)) > 1 and len(set(success)) == 2)
    ones = [x for x, s in sample if s]
    zeros = [x for x, s in sample if not s]
    p = len(ones) / len(sample)
    expected = (np.mean(ones) - np.mean(zeros)) / np.std(loc) * np.sqrt(p * (1 - p))
    assert point_biserial(loc, success).value == pytest.approx(expected, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(1, 4), min_size=3, max_size=3), min_size=2, max_size=12))
def test_fleiss_kappa_matches_the_direct_formula(scores):
    table = ratings_table(scores)
    n, cases = 3, len(scores)
    p_j = [sum(row[j] for row in table) / (cases * n) for j in range(5)]
    p_e = sum(p * p for p in p_j)
    assume(p_e < 1)
    p_bar = sum((sum(c * c for c in row) - n) / (n * (n - 1)) for row in table) / cases
    assert fleiss_kappa(table).value == pytest.approx((p_bar - p_e) / (1 - p_e), abs=1e-9)
