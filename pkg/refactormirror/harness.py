"""Study machinery: oracle entries, opportunity matching, rates, ratings and the metrics report."""
from __future__ import annotations

import re
import statistics
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from itertools import groupby
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from pydantic import BaseModel, Field, TypeAdapter, field_validator

from .errors import DegenerateInput, EmptySet, KindMismatch
from .refactorings import ALL_KINDS, RENAME_KINDS, EXTRACT_KINDS, INLINE_KINDS, RefactoringInstance
from .stats import StatResult, cliffs_delta, fleiss_kappa, point_biserial, ratings_table, wilcoxon_signed_rank

MATCH_THRESHOLD = Fraction(1, 2)
RATING_NAMES = {0: "Buggy", 1: "Failed", 2: "Poor", 3: "Good", 4: "Excellent"}
TEMPLATE_ORDER = ("P1", "P2", "P2_SUB", "P2_SUB_NARROW", "P3")
FAMILIES = {"rename": RENAME_KINDS, "extract": EXTRACT_KINDS, "inline": INLINE_KINDS}


class OracleEntry(BaseModel):
    id: str
    project: str = ""
    commit: str = ""
    file_path: str = ""
    refactoring_type: str
    subcategory: Optional[str] = None
    code_before: str
    code_expected: str
    oracle_instance: RefactoringInstance
    target_entities: list[str] = Field(default_factory=list)
    loc: int = 0

    @field_validator("refactoring_type")
    @classmethod
    def _known_type(cls, value: str) -> str:
        if value not in ALL_KINDS:
            raise ValueError(f"unknown refactoring type: {value}")
        return value


_DATASET = TypeAdapter(list[OracleEntry])


def load_dataset(path: Path) -> list[OracleEntry]:
    entries = _DATASET.validate_json(Path(path).read_text(encoding="utf-8"))
    for entry in entries:
        if not entry.loc:
            entry.loc = len([line for line in entry.code_before.splitlines() if line.strip()])
    return entries


# ---- opportunity matching ----


class ToleranceScore(BaseModel):
    commons: int
    extracted: int
    oracle: int
    value: float

    @property
    def ratio(self) -> Fraction:
        return Fraction(2 * self.commons, self.extracted + self.oracle)


def _line_key(span: Any) -> tuple[int, int]:
    if isinstance(span, dict):
        return span["start_line"], span["end_line"]
    if isinstance(span, (tuple, list)):
        return int(span[0]), int(span[-1])
    return span.start_line, span.end_line


def tolerance(extracted: Iterable[Any], oracle: Iterable[Any]) -> ToleranceScore:
    """Dice coefficient of two statement sets: 2 * |common| / (|extracted| + |oracle|)."""
    ours = {s if isinstance(s, str) else _line_key(s) for s in extracted}
    theirs = {s if isinstance(s, str) else _line_key(s) for s in oracle}
    if not ours or not theirs:
        raise EmptySet("tolerance needs two non-empty statement sets")
    commons = len(ours & theirs)
    ratio = Fraction(2 * commons, len(ours) + len(theirs))
    return ToleranceScore(commons=commons, extracted=len(ours), oracle=len(theirs), value=float(ratio))


def entity_of(r: RefactoringInstance) -> str:
    """The entity a single-entity refactoring is applied to."""
    p = r.params
    if r.kind == "rename_method":
        return f"{p['entity']}.{p['old_name']}({','.join(p.get('param_types') or [])})"
    if r.kind == "rename_variable":
        return f"{p['entity']}.{p['old_name']}#{p.get('ordinal', 0)}"
    if r.kind in RENAME_KINDS:
        return f"{p['entity']}.{p['old_name']}"
    if r.kind == "inline_method":
        return p["method"]
    if r.kind == "inline_variable":
        return f"{p['method']}.{p['variable']}#{p.get('ordinal', 0)}"
    if r.kind == "extract_variable":
        expr = re.sub(r"\s+", "", p["expression"])
        return f"{p['method']}:{expr}"
    if r.kind == "extract_method":
        return p["source_method"]
    if r.kind == "extract_class":
        return p["source_class"]
    raise KindMismatch(f"no entity rule for {r.kind}")


def _extracted_set(r: RefactoringInstance) -> list[Any]:
    if r.kind == "extract_method":
        return r.params["statements"]
    return [*r.params["moved_fields"], *(f"{m}()" for m in r.params["moved_methods"])]


def match_opportunity(suggested: RefactoringInstance, oracle: RefactoringInstance) -> bool:
    if suggested.kind != oracle.kind:
        raise KindMismatch(f"{suggested.kind} vs {oracle.kind}")
    if entity_of(suggested) != entity_of(oracle):
        return False
    if suggested.kind not in ("extract_method", "extract_class"):
        return True
    try:
        score = tolerance(_extracted_set(suggested), _extracted_set(oracle))
    except EmptySet:
        return False
    return score.ratio >= MATCH_THRESHOLD


def identifies(suggested: Iterable[RefactoringInstance], oracle: RefactoringInstance) -> bool:
    """True when any suggestion of the oracle's kind matches it."""
    return any(match_opportunity(s, oracle) for s in suggested if s.kind == oracle.kind)


# ---- rates ----


def success_rate(outcomes: Sequence[bool]) -> float:
    return sum(1 for o in outcomes if o) / len(outcomes) if outcomes else 0.0


def percent(numerator: int, denominator: int) -> Decimal:
    """Percentage rounded half-up to one decimal, the way the report prints it."""
    if denominator == 0:
        return Decimal("0.0")
    return (Decimal(numerator * 100) / Decimal(denominator)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)


def relative_improvement(old: Decimal, new: Decimal) -> Decimal:
    """(new - old) / old on printed percentages, as a percentage."""
    if old == 0:
        raise DegenerateInput("relative improvement over a zero rate")
    return ((new - old) / old * 100).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)


def format_count(succeeded: int, total: int) -> str:
    return f"{succeeded} ({percent(succeeded, total)}%)"


# ---- ratings ----


class FinalRating(BaseModel):
    value: Optional[float]
    needs_consensus: bool = False


def final_rating(scores: Sequence[int], consensus: Optional[int] = None) -> FinalRating:
    """Median of the raters' scores; a single Buggy vote sends the case to consensus."""
    if any(s not in RATING_NAMES for s in scores):
        raise ValueError(f"scores must be in 0..4, got {list(scores)}")
    if 0 in scores:
        return FinalRating(value=consensus, needs_consensus=True)
    return FinalRating(value=statistics.median(scores))


class RatingRecord(BaseModel):
    case_id: str
    rater_scores: list[int] = Field(min_length=3, max_length=3)
    consensus: Optional[int] = None

    @property
    def final(self) -> FinalRating:
        return final_rating(self.rater_scores, self.consensus)


class QualityCounts(BaseModel):
    excellent: int = 0
    good: int = 0
    poor: int = 0
    failed: int = 0
    buggy: int = 0

    @property
    def requests(self) -> int:
        return self.excellent + self.good + self.poor + self.failed + self.buggy

    @property
    def suggested(self) -> int:
        return self.requests - self.failed

    def __add__(self, other: "QualityCounts") -> "QualityCounts":
        return QualityCounts(**{k: getattr(self, k) + getattr(other, k) for k in QualityCounts.model_fields})


# ---- quartiles ----


def quartile_groups(entries: Sequence[Any], key=lambda e: e.loc) -> list[list[Any]]:
    """Four groups by ascending size; ties keep id order, earlier groups absorb the remainder."""
    ordered = sorted(entries, key=lambda e: (key(e), str(getattr(e, "id", getattr(e, "entry_id", "")))))
    base, extra = divmod(len(ordered), 4)
    groups, start = [], 0
    for i in range(4):
        size = base + (1 if i < extra else 0)
        groups.append(ordered[start:start + size])
        start += size
    return groups


# ---- report ----


class EntryOutcome(BaseModel):
    entry_id: str
    refactoring_type: str
    template: str
    loc: int
    success: bool
    applied: int = 0
    residual: int = 0
    note: str = ""


class RateRow(BaseModel):
    label: str
    refactoring_type: str
    succeeded: int
    total: int

    @property
    def rate(self) -> Decimal:
        return percent(self.succeeded, self.total)


class Comparison(BaseModel):
    label: str
    old: Decimal
    new: Decimal
    improvement: Decimal


class QualityRow(BaseModel):
    model: str
    counts: QualityCounts
    comparable_or_better: Decimal
    poor: Decimal
    buggy: Decimal


class QuartileRow(BaseModel):
    label: str
    quartile: int
    min_loc: int
    max_loc: int
    succeeded: int
    total: int


class MetricsReport(BaseModel):
    rates: list[RateRow] = Field(default_factory=list)
    comparisons: list[Comparison] = Field(default_factory=list)
    quality: list[QualityRow] = Field(default_factory=list)
    quartiles: list[QuartileRow] = Field(default_factory=list)
    statistics: list[StatResult] = Field(default_factory=list)

    def overall(self, label: str) -> RateRow:
        return next(r for r in self.rates if r.label == label and r.refactoring_type == "total")

    def to_json(self) -> dict:
        data = self.model_dump(mode="json")
        for row, dumped in zip(self.rates, data["rates"]):
            dumped["rate"] = str(row.rate)
        return data


def _rate_rows(label: str, succeeded: dict[str, int], totals: dict[str, int]) -> list[RateRow]:
    rows = [RateRow(label=label, refactoring_type=t, succeeded=succeeded.get(t, 0), total=totals[t])
            for t in ALL_KINDS if t in totals]
    for family, kinds in FAMILIES.items():
        if any(k in totals for k in kinds):
            rows.append(RateRow(label=label, refactoring_type=f"{family}_family",
                                succeeded=sum(succeeded.get(k, 0) for k in kinds),
                                total=sum(totals.get(k, 0) for k in kinds)))
    rows.append(RateRow(label=label, refactoring_type="total",
                        succeeded=sum(succeeded.values()), total=sum(totals.values())))
    return rows


def _comparisons(overall: dict[tuple[str, str], RateRow]) -> list[Comparison]:
    out = []
    for model in dict.fromkeys(m for m, _ in overall):
        templates = [t for t in TEMPLATE_ORDER if (model, t) in overall]
        for old_t, new_t in zip(templates, templates[1:]):
            old, new = overall[(model, old_t)].rate, overall[(model, new_t)].rate
            if old == 0:
                continue
            out.append(Comparison(label=f"{model} {old_t} -> {new_t}", old=old, new=new,
                                  improvement=relative_improvement(old, new)))
    return out


def _quality_row(model: str, counts: QualityCounts) -> QualityRow:
    return QualityRow(
        model=model,
        counts=counts,
        comparable_or_better=percent(counts.excellent + counts.good, counts.suggested),
        poor=percent(counts.poor, counts.suggested),
        buggy=percent(counts.buggy, counts.suggested),
    )


class OutcomeRun(BaseModel):
    template: str
    model: str
    requests_per_type: int = 20
    succeeded: dict[str, int]


class QualityTable(BaseModel):
    model: str
    counts: dict[str, QualityCounts]


class OutcomeTables(BaseModel):
    identification: list[OutcomeRun]
    quality: list[QualityTable] = Field(default_factory=list)


def load_outcome_tables(path: Path) -> OutcomeTables:
    return OutcomeTables.model_validate_json(Path(path).read_text(encoding="utf-8"))


def evaluate_tables(tables: OutcomeTables) -> MetricsReport:
    """Rebuild the summary figures from recorded per-type outcome counts."""
    report = MetricsReport()
    overall: dict[tuple[str, str], RateRow] = {}
    for run in tables.identification:
        label = f"{run.model} {run.template}"
        totals = {t: run.requests_per_type for t in run.succeeded}
        rows = _rate_rows(label, run.succeeded, totals)
        report.rates.extend(rows)
        overall[(run.model, run.template)] = rows[-1]
    report.comparisons = _comparisons(overall)
    for table in tables.quality:
        total = sum(table.counts.values(), QualityCounts())
        report.quality.append(_quality_row(table.model, total))
    return report


def evaluate_outcomes(outcomes: Sequence[EntryOutcome], ratings: Sequence[RatingRecord] = ()) -> MetricsReport:
    """Rates, size quartiles and significance statistics over per-entry results of a run."""
    report = MetricsReport()
    ordered = sorted(outcomes, key=lambda o: (TEMPLATE_ORDER.index(o.template) if o.template in TEMPLATE_ORDER
                                              else len(TEMPLATE_ORDER), o.template, o.entry_id))
    by_template = {t: list(g) for t, g in groupby(ordered, key=lambda o: o.template)}
    overall: dict[tuple[str, str], RateRow] = {}
    for template, group in by_template.items():
        succeeded: dict[str, int] = {}
        totals: dict[str, int] = {}
        for o in group:
            totals[o.refactoring_type] = totals.get(o.refactoring_type, 0) + 1
            succeeded[o.refactoring_type] = succeeded.get(o.refactoring_type, 0) + int(o.success)
        rows = _rate_rows(template, succeeded, totals)
        report.rates.extend(rows)
        overall[("run", template)] = rows[-1]

        for k, quartile in enumerate(quartile_groups(group, key=lambda o: o.loc), start=1):
            if quartile:
                report.quartiles.append(QuartileRow(
                    label=template, quartile=k, min_loc=quartile[0].loc, max_loc=quartile[-1].loc,
                    succeeded=sum(o.success for o in quartile), total=len(quartile)))
        try:
            report.statistics.append(point_biserial([o.loc for o in group], [o.success for o in group]))
        except DegenerateInput:
            pass

    report.comparisons = _comparisons(overall)
    templates = list(by_template)
    for old_t, new_t in zip(templates, templates[1:]):
        old = {o.entry_id: o.success for o in by_template[old_t]}
        new = {o.entry_id: o.success for o in by_template[new_t]}
        shared = sorted(old.keys() & new.keys())
        if not shared:
            continue
        pairs = [(int(new[i]), int(old[i])) for i in shared]
        report.statistics.append(wilcoxon_signed_rank(pairs, alternative="greater"))
        report.statistics.append(cliffs_delta([p[0] for p in pairs], [p[1] for p in pairs]))

    if ratings:
        report.statistics.append(fleiss_kappa(ratings_table([r.rater_scores for r in ratings])))
    return report


def render_table(report: MetricsReport) -> str:
    lines: list[str] = []
    if report.rates:
        lines.append(f"{'run':<24}{'refactoring type':<22}{'succeeded':>16}{'missed':>8}")
        for row in report.rates:
            lines.append(f"{row.label:<24}{row.refactoring_type:<22}"
                         f"{format_count(row.succeeded, row.total):>16}{row.total - row.succeeded:>8}")
    if report.comparisons:
        lines.append("")
        for c in report.comparisons:
            lines.append(f"{c.label:<46}{c.old}% -> {c.new}%  ({c.improvement}% relative)")
    if report.quality:
        lines.append("")
        lines.append(f"{'model':<10}{'excellent':>10}{'good':>6}{'poor':>6}{'failed':>8}{'buggy':>7}"
                     f"{'comparable+':>13}{'poor%':>8}{'buggy%':>8}")
        for q in report.quality:
            c = q.counts
            lines.append(f"{q.model:<10}{c.excellent:>10}{c.good:>6}{c.poor:>6}{c.failed:>8}{c.buggy:>7}"
                         f"{str(q.comparable_or_better) + '%':>13}{str(q.poor) + '%':>8}{str(q.buggy) + '%':>8}")
    if report.quartiles:
        lines.append("")
        for q in report.quartiles:
            lines.append(f"{q.label:<16}Q{q.quartile}  loc {q.min_loc:>5}..{q.max_loc:<5} "
                         f"{format_count(q.succeeded, q.total)}")
    if report.statistics:
        lines.append("")
        for s in report.statistics:
            lines.append(f"{s.statistic:<18}{s.value:.6g}  n={s.sizes}")
    return "\n".join(lines)


def load_outcomes(path: Path) -> list[EntryOutcome]:
    return TypeAdapter(list[EntryOutcome]).validate_json(Path(path).read_text(encoding="utf-8"))


def load_ratings(path: Path) -> list[RatingRecord]:
    return TypeAdapter(list[RatingRecord]).validate_json(Path(path).read_text(encoding="utf-8"))
