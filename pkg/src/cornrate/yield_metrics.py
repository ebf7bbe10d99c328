"""Per-patent and per-year yield statistics.

Definitions, per trial set with N head-to-head tests (P_i patented,
C_i control yields):

    yield_a           = mean_i(P_i)
    yield_b           = max_i(P_i)
    performance_ratio = mean_i(P_i / C_i)     (mean of ratios, not ratio of means)

and per filed year over all summaries, the yearly maximum of yield_b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .core_data import FieldTestRecord, PatentTrialSet
from .trend import TrendSeries


@dataclass(frozen=True)
class YieldSummary:
    patent_number: str
    yield_a: float
    yield_b: float
    performance_ratio: float
    n_tests: int


def yield_a(trial_set: PatentTrialSet) -> float:
    trial_set.validate()
    yields = [c.patented_yield for c in trial_set.comparisons]
    return math.fsum(yields) / len(yields)


def yield_b(trial_set: PatentTrialSet) -> float:
    trial_set.validate()
    return max(c.patented_yield for c in trial_set.comparisons)


def performance_ratio(trial_set: PatentTrialSet) -> float:
    trial_set.validate()
    ratios = [c.patented_yield / c.control_yield for c in trial_set.comparisons]
    return math.fsum(ratios) / len(ratios)


def summarize(trial_set: PatentTrialSet) -> YieldSummary:
    return YieldSummary(
        patent_number=trial_set.patent_number,
        yield_a=yield_a(trial_set),
        yield_b=yield_b(trial_set),
        performance_ratio=performance_ratio(trial_set),
        n_tests=trial_set.n_tests,
    )


def yearly_max_yield(summaries: Iterable[tuple[int, YieldSummary]]) -> TrendSeries:
    """Maximum yield_b among patents filed each year; no interpolation."""
    best: dict[int, float] = {}
    empty = True
    for year, summary in summaries:
        empty = False
        if summary.yield_b > best.get(year, 0.0):
            best[year] = summary.yield_b
    if empty:
        raise ValueError("no summaries")
    return TrendSeries.from_pairs(best.items())


def state_yearly_average(tests: Iterable[FieldTestRecord],
                         two_stage: bool = True) -> TrendSeries:
    """Average yield per year across a state's field tests.

    two_stage=True (default) averages per (year, region) first and then
    across regions, so a region with more rows does not dominate the
    year. two_stage=False pools all rows of the year; use it for sources
    that publish pre-averaged rows.
    """
    tests = list(tests)
    if not tests:
        raise ValueError("no field tests")
    if two_stage:
        by_year_region: dict[int, dict[str, list[float]]] = {}
        for t in tests:
            by_year_region.setdefault(t.year, {}).setdefault(t.region, []).append(t.yield_value)
        points = []
        for year in sorted(by_year_region):
            region_means = [math.fsum(v) / len(v)
                            for _, v in sorted(by_year_region[year].items())]
            points.append((year, math.fsum(region_means) / len(region_means)))
    else:
        by_year: dict[int, list[float]] = {}
        for t in tests:
            by_year.setdefault(t.year, []).append(t.yield_value)
        points = [(year, math.fsum(v) / len(v))
                  for year, v in sorted(by_year.items())]
    return TrendSeries(tuple(points))
