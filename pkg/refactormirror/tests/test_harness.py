from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from refactormirror.errors import DegenerateInput, EmptySet, KindMismatch
from refactormirror.harness import (
    MATCH_THRESHOLD,
    EntryOutcome,
    OracleEntry,
    QualityCounts,
    RatingRecord,
    entity_of,
    evaluate_outcomes,
    evaluate_tables,
    final_rating,
    format_count,
    identifies,
    load_outcome_tables,
    match_opportunity,
    percent,
    quartile_groups,
    relative_improvement,
    render_table,
    success_rate,
    tolerance,
)
from refactormirror.refactorings import ExtractMethodParams, LineSpan, RefactoringInstance


def _extract_method(lines: list[int], source_method: str = "A.m()") -> RefactoringInstance:
    spans = [LineSpan(start_line=k, end_line=k) for k in lines]
    return RefactoringInstance.build("extract_method", ExtractMethodParams(
        source_method=source_method, statements=spans, new_name="helper", parameters=[], arguments=[],
        call_site=spans[0],
    ))


def _rate(report, label, refactoring_type="total"):
    return next(r.rate for r in report.rates if r.label == label and r.refactoring_type == refactoring_type)


def test_tolerance_is_dice_of_statement_sets():
    assert tolerance([(k, k) for k in range(1, 7)], [(k, k) for k in range(4, 10)]).ratio == Fraction(6, 12)
    score = tolerance(["a", "b", "c", "d", "e"], ["d", "e", "f", "g"])
    assert (score.commons, score.ratio) == (2, Fraction(4, 9))
    assert tolerance(["x"], ["x", "y", "z", "w", "v"]).ratio == Fraction(1, 3)
    with pytest.raises(EmptySet):
        tolerance([], ["x"])


def test_extract_method_matches_at_half_overlap():
    oracle = _extract_method([10, 11, 12, 13])
    assert MATCH_THRESHOLD == Fraction(1, 2)
    assert match_opportunity(_extract_method([12, 13, 14, 15]), oracle), "exactly 1/2 must match"
    assert not match_opportunity(_extract_method([13, 14, 15, 16]), oracle)
    assert not match_opportunity(_extract_method([10, 11, 12, 13], "A.other()"), oracle)


def test_kind_mismatch_and_identifies(entry):
    oracle = entry("s02").oracle_instance
    with pytest.raises(KindMismatch):
        match_opportunity(entry("s01").oracle_instance, oracle)
    assert identifies([entry("s01").oracle_instance, oracle], oracle)
    assert not identifies([entry("s01").oracle_instance], oracle)


def test_entity_paths_per_kind(entry):
    assert entity_of(entry("s01").oracle_instance) == "Account.calc(int)"
    assert entity_of(entry("s02").oracle_instance) == "Stats.sum(int[]).t#0"
    assert entity_of(entry("s03").oracle_instance) == "Shape.describe():width*height"
    assert entity_of(entry("s04").oracle_instance) == "Greeter.greet().message#0"
    assert entity_of(entry("s05").oracle_instance) == "Invoice.print()"
    assert entity_of(entry("s06").oracle_instance) == "Order.total()"


def test_rename_with_other_new_name_still_identifies(entry):
    oracle = entry("s02").oracle_instance
    other = RefactoringInstance(kind=oracle.kind, params={**oracle.params, "new_name": "accumulator"})
    assert match_opportunity(other, oracle)


def test_dataset_rejects_unknown_refactoring_type(entry):
    data = entry("s01").model_dump()
    data["refactoring_type"] = "move_method"
    with pytest.raises(ValidationError):
        OracleEntry.model_validate(data)


def test_dataset_loc_counts_non_blank_lines(entry):
    assert entry("s04").loc == 7


def test_rates_and_percent_rounding():
    assert success_rate([True, False, True, True]) == 0.75
    assert success_rate([]) == 0.0
    assert percent(28, 180) == Decimal("15.6")
    assert percent(1, 8) == Decimal("12.5")
    assert percent(1, 16) == Decimal("6.3"), "half-up rounding"
    assert format_count(28, 180) == "28 (15.6%)"
    assert relative_improvement(Decimal("15.6"), Decimal("52.2")) == Decimal("234.6")
    with pytest.raises(DegenerateInput):
        relative_improvement(Decimal("0"), Decimal("10"))


@pytest.mark.parametrize("scores, expected", [
    ((3, 3, 4), 3),
    ((4, 2, 3), 3),
    ((1, 2, 2), 2),
    ((4, 4, 4), 4),
])
def test_final_rating_is_the_median(scores, expected):
    rating = final_rating(scores)
    assert rating.value == expected and not rating.needs_consensus


def test_buggy_vote_needs_consensus():
    assert final_rating((0, 4, 4)).needs_consensus
    assert final_rating((0, 4, 4)).value is None
    assert final_rating((0, 4, 4), consensus=3).value == 3
    record = RatingRecord(case_id="c1", rater_scores=[0, 3, 3], consensus=0)
    assert record.final.value == 0
    with pytest.raises(ValueError):
        final_rating((5, 1, 1))


def test_quality_counts_add_up():
    total = QualityCounts(excellent=1, good=2, failed=1) + QualityCounts(poor=3, buggy=1)
    assert total.requests == 8 and total.suggested == 7


@pytest.mark.parametrize("n, sizes", [
    (8, [2, 2, 2, 2]),
    (9, [3, 2, 2, 2]),
    (10, [3, 3, 2, 2]),
    (180, [45, 45, 45, 45]),
    (3, [1, 1, 1, 0]),
])
def test_quartile_group_sizes(n, sizes):
    items = [EntryOutcome(entry_id=f"e{k:03d}", refactoring_type="rename_method", template="P1",
                          loc=(k * 7) % 13, success=False) for k in range(n)]
    groups = quartile_groups(items)
    assert [len(g) for g in groups] == sizes
    flat = [o.loc for g in groups for o in g]
    assert flat == sorted(flat)


def test_quartile_ties_keep_id_order():
    items = [EntryOutcome(entry_id=i, refactoring_type="inline_method", template="P1", loc=5, success=False)
             for i in ("d", "a", "c", "b")]
    assert [[o.entry_id for o in g] for g in quartile_groups(items)] == [["a"], ["b"], ["c"], ["d"]]


def test_bundled_tables_reproduce_the_published_summary(data_dir):
    report = evaluate_tables(load_outcome_tables(data_dir / "published_outcomes.json"))
    assert _rate(report, "gpt P1") == Decimal("15.6")
    assert _rate(report, "gemini P1") == Decimal("3.9")
    assert _rate(report, "gpt P2") == Decimal("52.2")
    assert _rate(report, "gemini P2") == Decimal("21.1")
    assert _rate(report, "gpt P2_SUB") == Decimal("66.7")
    assert _rate(report, "gpt P2_SUB_NARROW") == Decimal("86.7")
    assert _rate(report, "gpt P2", "rename_family") == Decimal("67.5")
    assert report.overall("gpt P1").succeeded == 28

    improvements = {c.label: c.improvement for c in report.comparisons}
    assert improvements == {
        "gpt P1 -> P2": Decimal("234.6"),
        "gpt P2 -> P2_SUB": Decimal("27.8"),
        "gpt P2_SUB -> P2_SUB_NARROW": Decimal("30.0"),
        "gemini P1 -> P2": Decimal("441.0"),
    }

    quality = {q.model: q for q in report.quality}
    assert quality["gpt"].comparable_or_better == Decimal("63.6")
    assert quality["gemini"].comparable_or_better == Decimal("56.2")
    assert quality["gpt"].counts.requests == 180
    assert "28 (15.6%)" in render_table(report)


def _outcomes(template, successes):
    return [EntryOutcome(entry_id=f"e{k}", refactoring_type="extract_method", template=template,
                         loc=10 + k, success=s) for k, s in enumerate(successes)]


def test_evaluate_outcomes_compares_consecutive_templates():
    old = _outcomes("P1", [False, False, True, False, False, False])
    new = _outcomes("P2", [True, True, True, True, True, False])
    report = evaluate_outcomes(old + new, ratings=[RatingRecord(case_id="x", rater_scores=[3, 3, 3]),
                                                   RatingRecord(case_id="y", rater_scores=[2, 2, 2])])
    assert _rate(report, "P1") == Decimal("16.7")
    assert _rate(report, "P2") == Decimal("83.3")
    stats = {s.statistic: s for s in report.statistics}
    assert stats["wilcoxon_p"].value == pytest.approx(1 / 16)
    assert stats["cliffs_delta"].value == pytest.approx((25 - 1) / 36)
    assert stats["fleiss_kappa"].value == pytest.approx(1.0)
    assert [q.total for q in report.quartiles if q.label == "P1"] == [2, 2, 1, 1]


def test_evaluate_outcomes_skips_degenerate_correlation():
    report = evaluate_outcomes(_outcomes("P1", [True, True, True]))
    assert all(s.statistic != "point_biserial_r" for s in report.statistics)


@settings(max_examples=1000, deadline=None)
@given(st.sets(st.integers(1, 40), min_size=1), st.sets(st.integers(1, 40), min_size=1))
def test_tolerance_matches_set_intersection(extracted, oracle):
    score = tolerance([(k, k) for k in extracted], [(k, k) for k in oracle])
    assert score.ratio == Fraction(2 * len(extracted & oracle), len(extracted) + len(oracle))
    assert (score.ratio >= MATCH_THRESHOLD) == (4 * len(extracted & oracle) >= len(extracted) + len(oracle))
