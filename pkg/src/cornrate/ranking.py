"""Cohort mid-rank percentile normalization.

Used to strip year effects from citation counts and path-count
centralities: within each cohort (typically a publication or application
year), percentile = (count strictly below + 0.5 * count equal) / size.
Percentiles within any cohort average to exactly 0.5.
"""

from __future__ import annotations

from typing import Hashable, Mapping, TypeVar

K = TypeVar("K", bound=Hashable)


def midrank_percentiles(values: Mapping[K, float],
                        cohort_of: Mapping[K, Hashable]) -> dict[K, float]:
    cohorts: dict[Hashable, list[K]] = {}
    for key in values:
        cohorts.setdefault(cohort_of[key], []).append(key)
    result: dict[K, float] = {}
    for members in cohorts.values():
        size = len(members)
        ordered = sorted(members, key=lambda m: values[m])
        i = 0
        while i < size:
            j = i
            while j < size and values[ordered[j]] == values[ordered[i]]:
                j += 1
            percentile = (i + 0.5 * (j - i)) / size
            for m in ordered[i:j]:
                result[m] = percentile
            i = j
    return result
