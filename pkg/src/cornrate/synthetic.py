"""Seeded synthetic fixture: 70 patents with trials and field tests.

The real analysis dataset is not redistributable, so this generator
produces a structurally equivalent stand-in with known ground truth: a
positive effect of the trial performance ratio on forward citations
(log-linear, TRUE_PERFORMANCE_EFFECT), an exponential yield trend at
TRUE_IMPROVEMENT_RATE, and per-year multiplicative weather factors
shared by all varieties within a region. Everything is deterministic
given the seed.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core_data import Dataset, FieldTestRecord, PatentRecord, PatentTrialSet, TrialComparison
from .title_parser import annotate_patents

DEFAULT_SEED = 20160826
TRUE_IMPROVEMENT_RATE = 0.015
TRUE_PERFORMANCE_EFFECT = 25.0  # per unit of performance ratio, log scale

_ASSIGNEES = ("PIONEER", "DEKALB", "CARGILL", "GOLDEN HARVEST")
_REGIONS = ("North", "South")


def synthetic_dataset(seed: int = DEFAULT_SEED, n_patents: int = 70) -> Dataset:
    rng = np.random.default_rng(seed)
    patents: dict[str, PatentRecord] = {}
    trial_sets: list[PatentTrialSet] = []
    numbers: list[str] = []

    for i in range(n_patents):
        number = str(5000000 + i * 1111)
        filed = 1985 + (i % 26)  # covers 1985..2010
        granted = filed + int(rng.integers(1, 4))
        inbred = i % 5 == 4
        variety = f"SYN{i:04d}"
        title = (f"Inbred corn line {variety}" if inbred
                 else f"Hybrid corn variety {variety}")
        # Latent quality drives both trial ratios and citations received.
        quality = abs(rng.normal(0.03, 0.03))
        lam = np.exp(-26.0 + TRUE_PERFORMANCE_EFFECT * (1.0 + quality)
                     + 0.012 * (filed - 1985))
        cite_forward = int(rng.poisson(lam))
        # Only earlier patents are citable (keeps the citation graph acyclic
        # and the grant-year deltas nonnegative).
        citable = [m for m in numbers
                   if patents[m].filed_year <= filed and patents[m].granted_year <= granted]
        n_backward = int(rng.integers(2, 6)) if citable else 0
        cited = list(rng.choice(citable, size=min(n_backward, len(citable)),
                                replace=False)) if citable else []
        patents[number] = PatentRecord(
            patent_number=number,
            title=title,
            assignee=_ASSIGNEES[i % len(_ASSIGNEES)],
            filed_year=filed,
            granted_year=granted,
            cited_patents=[str(c) for c in cited],
            forward_citation_count=cite_forward,
        )
        numbers.append(number)

        n_tests = int(rng.integers(3, 9))
        base = 100.0 * np.exp(TRUE_IMPROVEMENT_RATE * (filed - 1985))
        comparisons = []
        for t in range(n_tests):
            control = base * float(rng.uniform(0.9, 1.1))
            ratio = 1.0 + quality + float(rng.normal(0.0, 0.005))
            comparisons.append(TrialComparison(
                patented_yield=round(control * ratio, 1),
                control_yield=round(control, 1),
                control_name=f"C{i:02d}{t}",
            ))
        trial_sets.append(PatentTrialSet(number, comparisons))

    annotate_patents(patents.values())

    field_tests: list[FieldTestRecord] = []
    varieties = {region: [f"FT{region[0]}{j}" for j in range(6)] for region in _REGIONS}
    varieties["North"][0] = "CTRL1"  # long-running control variety
    for year in range(1995, 2011):
        weather = {region: float(rng.uniform(0.8, 1.2)) for region in _REGIONS}
        for region in _REGIONS:
            for j, name in enumerate(varieties[region]):
                level = 140.0 * np.exp(0.02 * (year - 1995)) * (1.0 + 0.01 * j)
                field_tests.append(FieldTestRecord(
                    state="SYNTHETIC",
                    year=year,
                    region=region,
                    brand=_ASSIGNEES[j % len(_ASSIGNEES)],
                    hybrid=name,
                    yield_value=round(level * weather[region], 1),
                    moisture=round(float(rng.uniform(14.0, 22.0)), 1),
                ))
        # A few patented varieties show up in the trials for matching.
        for number in numbers[year - 1995::20]:
            p = patents[number]
            field_tests.append(FieldTestRecord(
                state="SYNTHETIC",
                year=year,
                region="North",
                brand=p.assignee,
                hybrid=p.variety_name or "",
                yield_value=round(140.0 * np.exp(0.02 * (year - 1995)), 1),
                moisture=16.0,
            ))

    return Dataset(patents=patents, trial_sets=trial_sets, field_tests=field_tests)


def write_synthetic_csvs(directory, seed: int = DEFAULT_SEED) -> dict[str, Path]:
    """Write the fixture in the raw ingestion formats (plus network files)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    dataset = synthetic_dataset(seed)
    paths = {name: directory / f"{name}.csv"
             for name in ("patents", "trials", "fieldtests", "nodes", "edges")}

    with paths["patents"].open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["patent_number", "title", "assignee", "filed_year",
                    "granted_year", "forward_citations", "cited_patents"])
        for p in dataset.patents.values():
            w.writerow([p.patent_number, p.title, p.assignee, p.filed_year,
                        p.granted_year, p.forward_citation_count,
                        ";".join(p.cited_patents)])

    with paths["trials"].open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["patent_number", "patented_variety", "control_variety",
                    "patented_yield", "control_yield"])
        for ts in dataset.trial_sets:
            variety = dataset.patents[ts.patent_number].variety_name
            for c in ts.comparisons:
                w.writerow([ts.patent_number, variety, c.control_name,
                            c.patented_yield, c.control_yield])

    with paths["fieldtests"].open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["Year", "Region", "Brand", "Hybrid", "Yield", "Moisture"])
        for t in dataset.field_tests:
            w.writerow([t.year, t.region, t.brand, t.hybrid, t.yield_value, t.moisture])

    with paths["nodes"].open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["patent_number", "application_year"])
        for p in dataset.patents.values():
            w.writerow([p.patent_number, p.filed_year])

    with paths["edges"].open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["citing_patent", "cited_patent"])
        for p in dataset.patents.values():
            for cited in p.cited_patents:
                w.writerow([p.patent_number, cited])

    return paths


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "synthetic_fixture"
    for name, path in write_synthetic_csvs(target).items():
        print(f"{name}: {path}")
