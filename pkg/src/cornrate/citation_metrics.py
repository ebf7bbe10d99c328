"""Patent-metadata citation statistics and the first predictive model.

Cite3 is the average number of forward citations a domain patent
receives within 3 years of publication (grant). Together with the mean
publication year it feeds the affine rate model

    K1 = -31.1285 + 0.0155 * AvePubYear + 0.1406 * Cite3

whose coefficients are fixed constants (see constants module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from . import constants
from .core_data import PatentRecord
from .ranking import midrank_percentiles


class CitationError(Exception):
    """Missing publication year or impossible (backwards-in-time) citation."""


def build_internal_edges(patents: Mapping[str, PatentRecord]) -> list[tuple[str, str]]:
    """(citing, cited) pairs restricted to patents present in the collection."""
    edges = []
    for p in patents.values():
        for cited in p.cited_patents:
            if cited in patents:
                edges.append((p.patent_number, cited))
    return edges


def cite3_counts(patents: Iterable[PatentRecord],
                 citation_edges: Iterable[tuple[str, str]],
                 pub_years: Optional[Mapping[str, int]] = None) -> dict[str, int]:
    """Per-patent count of forward citations within the 3-year window.

    pub_years may supply years for citing patents outside the domain;
    domain patents default to their grant year.
    """
    patents = list(patents)
    years = dict(pub_years or {})
    for p in patents:
        years.setdefault(p.patent_number, p.granted_year)
    counts = {p.patent_number: 0 for p in patents}
    for citing, cited in citation_edges:
        if cited not in counts:
            continue
        if citing not in years:
            raise CitationError(f"no publication year for citing patent {citing}")
        delta = years[citing] - years[cited]
        if delta < 0:
            raise CitationError(
                f"citation from {citing} predates cited patent {cited}")
        if delta <= 3:
            counts[cited] += 1
    return counts


def compute_cite3(patents: Iterable[PatentRecord],
                  citation_edges: Iterable[tuple[str, str]],
                  pub_years: Optional[Mapping[str, int]] = None) -> float:
    counts = cite3_counts(patents, citation_edges, pub_years)
    if not counts:
        raise CitationError("empty patent collection")
    return math.fsum(counts[k] for k in sorted(counts)) / len(counts)


def compute_ave_pub_year(patents: Iterable[PatentRecord]) -> float:
    years = [p.granted_year for p in patents]
    if not years:
        raise CitationError("empty patent collection")
    return math.fsum(years) / len(years)


def cite3_rank_percentile(per_patent_cite3: Mapping[str, float],
                          pub_years: Mapping[str, int]) -> dict[str, float]:
    """Mid-rank percentile of Cite3 within each publication-year cohort."""
    return midrank_percentiles(per_patent_cite3, pub_years)


def predict_k1(ave_pub_year: float, cite3: float) -> float:
    return (constants.K1_INTERCEPT
            + constants.K1_AVE_PUB_YEAR * ave_pub_year
            + constants.K1_CITE3 * cite3)


@dataclass
class DomainCitationStats:
    spc: int
    cite3: float
    cite3_total: int
    ave_pub_year: float
    cite_forward_mean: float
    k1: float
    per_patent_cite3: dict[str, int] = field(default_factory=dict)
    per_patent_rank_percentile: dict[str, float] = field(default_factory=dict)


def domain_citation_stats(patents: Iterable[PatentRecord],
                          citation_edges: Iterable[tuple[str, str]],
                          pub_years: Optional[Mapping[str, int]] = None,
                          exclusions: Iterable[str] = ()) -> DomainCitationStats:
    """All citation statistics for one domain slice, exclusions applied first."""
    excluded = set(exclusions)
    kept = [p for p in patents if p.patent_number not in excluded]
    if not kept:
        raise CitationError("no patents left after exclusions")
    edges = [(a, b) for a, b in citation_edges
             if a not in excluded and b not in excluded]
    counts = cite3_counts(kept, edges, pub_years)
    spc = len(kept)
    total = sum(counts[k] for k in sorted(counts))
    cite3 = total / spc
    ave_pub_year = compute_ave_pub_year(kept)
    cite_forward_mean = math.fsum(p.forward_citation_count for p in kept) / spc
    grant_years = {p.patent_number: p.granted_year for p in kept}
    return DomainCitationStats(
        spc=spc,
        cite3=cite3,
        cite3_total=total,
        ave_pub_year=ave_pub_year,
        cite_forward_mean=cite_forward_mean,
        k1=predict_k1(ave_pub_year, cite3),
        per_patent_cite3=counts,
        per_patent_rank_percentile=cite3_rank_percentile(counts, grant_years),
    )
