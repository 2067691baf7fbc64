"""Significance and agreement statistics used by the evaluation report."""
from __future__ import annotations

from typing import Any, Literal, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats

from .errors import DegenerateInput

StatName = Literal["point_biserial_r", "wilcoxon_p", "cliffs_delta", "fleiss_kappa"]
Alternative = Literal["two-sided", "greater", "less"]

# largest n for which the signed-rank null distribution is enumerated
EXACT_LIMIT = 20


class StatResult(BaseModel):
    statistic: StatName
    value: float
    sizes: list[int]
    detail: dict[str, Any] = Field(default_factory=dict)


def _exact_signed_rank(doubled_ranks: np.ndarray, w_plus: int) -> tuple[float, float]:
    """P(W+ >= w) and P(W+ <= w) under the null, by counting subsets of ranks.

    Ranks are doubled so that midranks of ties stay integral.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for rank in doubled_ranks.astype(int):
        shifted = np.zeros_like(counts)
        shifted[rank:] = counts[: total + 1 - rank]
        counts = counts + shifted
    outcomes = 2 ** len(doubled_ranks)
    upper = sum(counts[w_plus:])
    lower = sum(counts[: w_plus + 1])
    return upper / outcomes, lower / outcomes


def wilcoxon_signed_rank(pairs: Sequence[tuple[float, float]], alternative: Alternative = "two-sided") -> StatResult:
    """Signed-rank test on ``a - b`` with zero differences dropped.

    ``greater`` tests whether ``a`` tends to exceed ``b``. Exact for up to
    20 non-zero differences, normal approximation with tie correction above.
    """
    data = np.asarray(pairs, dtype=float).reshape(-1, 2)
    differences = data[:, 0] - data[:, 1]
    non_zero = differences[differences != 0]
    n = len(non_zero)
    if n == 0:
        return StatResult(statistic="wilcoxon_p", value=1.0, sizes=[len(data), 0],
                          detail={"w_plus": 0.0, "w_minus": 0.0, "alternative": alternative, "method": "exact"})

    ranks = stats.rankdata(np.abs(non_zero))
    w_plus = float(np.sum(ranks[non_zero > 0]))
    w_minus = float(np.sum(ranks[non_zero < 0]))

    if n <= EXACT_LIMIT:
        method = "exact"
        p_greater, p_less = _exact_signed_rank(ranks * 2, int(round(w_plus * 2)))
    else:
        method = "normal"
        mean_w = n * (n + 1) / 4
        _, tie_sizes = np.unique(np.abs(non_zero), return_counts=True)
        variance = n * (n + 1) * (2 * n + 1) / 24 - np.sum(tie_sizes ** 3 - tie_sizes) / 48
        z = (w_plus - mean_w) / np.sqrt(variance)
        p_greater, p_less = float(stats.norm.sf(z)), float(stats.norm.cdf(z))

    if alternative == "greater":
        p = p_greater
    elif alternative == "less":
        p = p_less
    else:
        p = min(1.0, 2 * min(p_greater, p_less))
    return StatResult(
        statistic="wilcoxon_p",
        value=float(p),
        sizes=[len(data), n],
        detail={"w_plus": w_plus, "w_minus": w_minus, "alternative": alternative, "method": method},
    )


def cliffs_delta(a: Sequence[float], b: Sequence[float]) -> StatResult:
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.size == 0 or y.size == 0:
        raise DegenerateInput("cliff's delta needs two non-empty samples")
    signs = np.sign(x[:, None] - y[None, :])
    delta = float(signs.sum() / (x.size * y.size))
    return StatResult(
        statistic="cliffs_delta",
        value=delta,
        sizes=[int(x.size), int(y.size)],
        detail={"greater": int((signs > 0).sum()), "less": int((signs < 0).sum()), "magnitude": _magnitude(delta)},
    )


def _magnitude(delta: float) -> str:
    size = abs(delta)
    if size < 0.147:
        return "negligible"
    if size < 0.33:
        return "small"
    if size < 0.474:
        return "medium"
    return "large"


def fleiss_kappa(table: Sequence[Sequence[int]]) -> StatResult:
    """Fleiss' kappa over a cases x categories table of rater counts."""
    counts = np.asarray(table, dtype=float)
    if counts.ndim != 2 or counts.shape[0] == 0:
        raise DegenerateInput("fleiss' kappa needs a non-empty cases x categories table")
    raters = counts.sum(axis=1)
    if not np.all(raters == raters[0]):
        raise DegenerateInput("every case must be rated by the same number of raters")
    n = raters[0]
    if n < 2:
        raise DegenerateInput("fleiss' kappa needs at least two raters")
    cases = counts.shape[0]

    per_case = (np.sum(counts ** 2, axis=1) - n) / (n * (n - 1))
    p_bar = float(per_case.mean())
    proportions = counts.sum(axis=0) / (cases * n)
    p_e = float(np.sum(proportions ** 2))
    if np.isclose(p_e, 1.0):
        if np.isclose(p_bar, 1.0):
            kappa = 1.0
        else:
            raise DegenerateInput("expected agreement is 1")
    else:
        kappa = (p_bar - p_e) / (1 - p_e)
    return StatResult(
        statistic="fleiss_kappa",
        value=float(kappa),
        sizes=[cases, int(n)],
        detail={"observed_agreement": p_bar, "expected_agreement": p_e},
    )


def ratings_table(scores: Sequence[Sequence[int]], categories: int = 5) -> list[list[int]]:
    """Turn per-case rater scores (0..categories-1) into the count table fleiss_kappa takes."""
    table = []
    for row in scores:
        counts = [0] * categories
        for score in row:
            counts[score] += 1
        table.append(counts)
    return table


def point_biserial(loc: Sequence[float], success: Sequence[bool]) -> StatResult:
    x = np.asarray(loc, dtype=float)
    y = np.asarray(success, dtype=float)
    if x.size != y.size:
        raise DegenerateInput("loc and success must have the same length")
    if x.size < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInput("point-biserial correlation is undefined for constant input")
    r, p = stats.pointbiserialr(y, x)
    return StatResult(
        statistic="point_biserial_r",
        value=float(r),
        sizes=[int(x.size), int(y.sum())],
        detail={"p": float(p)},
    )
