"""Exponential (generalized Moore's law) trend fitting.

A performance trend q_t = q0 * exp(k * (t - t0)) is fitted by ordinary
least squares on log(value) versus year, which is how the source trends
are reported (log-scale plots, linear-regression statistics). Also holds
the weather-corrected series construction: dividing each year's best
regional yield by a long-running control variety's yield cancels any
multiplicative weather/soil factor shared within the region and year.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from scipy import stats

from .core_data import FieldTestRecord


class TrendError(Exception):
    """Bad series or unmet precondition (e.g. control absent in region)."""


@dataclass(frozen=True)
class TrendSeries:
    points: tuple[tuple[int, float], ...]

    def __post_init__(self):
        years = [y for y, _ in self.points]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise TrendError("years must be strictly increasing")
        if any(v <= 0 for _, v in self.points):
            raise TrendError("values must be positive")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "TrendSeries":
        return cls(tuple(sorted(pairs)))

    @property
    def years(self) -> list[int]:
        return [y for y, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]

    def restrict(self, year_from: Optional[int] = None,
                 year_to: Optional[int] = None) -> "TrendSeries":
        lo = year_from if year_from is not None else -math.inf
        hi = year_to if year_to is not None else math.inf
        return TrendSeries(tuple(p for p in self.points if lo <= p[0] <= hi))

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["year", "value"])
            for year, value in self.points:
                w.writerow([year, repr(value)])

    @classmethod
    def read_csv(cls, path) -> "TrendSeries":
        path = Path(path)
        if not path.is_file():
            raise TrendError(f"missing series file: {path}")
        points = []
        with path.open(newline="", encoding="utf-8") as f:
            for row in csv.DictReader(f):
                points.append((int(row["year"]), float(row["value"].replace(",", "."))))
        return cls.from_pairs(points)


@dataclass
class FitResult:
    k: float                      # per-year improvement rate (log-space slope)
    q0: float                     # fitted value at the reference year
    t0: int                       # reference year (first year of the series)
    n: int
    r_squared: Optional[float] = None   # unset for n == 2
    p_value: Optional[float] = None     # two-sided slope t-test, df = n - 2
    residual_std: Optional[float] = None

    def as_dict(self) -> dict:
        return {"rate_k": self.k, "q0": self.q0, "t0": self.t0, "n": self.n,
                "r_squared": self.r_squared, "p_value": self.p_value}


def fit_exponential(series: TrendSeries) -> FitResult:
    """OLS of log(value) on year. Summation order is fixed for determinism."""
    n = len(series.points)
    if n < 2:
        raise TrendError(f"need at least 2 points, got {n}")
    years = series.years
    logs = [math.log(v) for v in series.values]
    x_mean = math.fsum(years) / n
    y_mean = math.fsum(logs) / n
    sxx = math.fsum((x - x_mean) ** 2 for x in years)
    sxy = math.fsum((x - x_mean) * (y - y_mean) for x, y in zip(years, logs))
    k = sxy / sxx
    t0 = years[0]
    q0 = math.exp(y_mean + k * (t0 - x_mean))
    if n == 2:
        return FitResult(k=k, q0=q0, t0=t0, n=n)

    residuals = [y - (y_mean + k * (x - x_mean)) for x, y in zip(years, logs)]
    sse = math.fsum(r * r for r in residuals)
    sst = math.fsum((y - y_mean) ** 2 for y in logs)
    r_squared = 1.0 - sse / sst if sst > 0 else 0.0
    df = n - 2
    resid_var = sse / df
    se = math.sqrt(resid_var / sxx)
    if se == 0.0:
        p_value = 0.0 if k != 0.0 else 1.0
    else:
        p_value = 2.0 * stats.t.sf(abs(k) / se, df)
    return FitResult(k=k, q0=q0, t0=t0, n=n, r_squared=r_squared,
                     p_value=float(p_value), residual_std=math.sqrt(resid_var))


@dataclass(frozen=True)
class ControlCandidate:
    region: str
    variety: str
    first_year: int
    last_year: int

    @property
    def n_years(self) -> int:
        return self.last_year - self.first_year + 1


def find_control_varieties(tests: Iterable[FieldTestRecord],
                           min_years: int = 7) -> list[ControlCandidate]:
    """Varieties tested in >= min_years consecutive years in one region.

    Reports the longest consecutive run per (region, variety).
    """
    if min_years < 2:
        raise ValueError("min_years must be at least 2")
    years_by_key: dict[tuple[str, str], set[int]] = {}
    for t in tests:
        years_by_key.setdefault((t.region, t.hybrid), set()).add(t.year)
    candidates = []
    for (region, variety), years in sorted(years_by_key.items()):
        best_start = best_len = 0
        start = None
        prev = None
        for y in sorted(years):
            if prev is None or y != prev + 1:
                start = y
            prev = y
            if y - start + 1 > best_len:
                best_len = y - start + 1
                best_start = start
        if best_len >= min_years:
            candidates.append(ControlCandidate(region, variety, best_start,
                                               best_start + best_len - 1))
    return candidates


def weather_corrected_series(tests: Iterable[FieldTestRecord], region: str,
                             control: str) -> TrendSeries:
    """Best regional yield per year divided by the control variety's yield.

    Restricted to the control's tested years in the region; any per-year
    factor multiplying every variety in the region cancels exactly.
    """
    best: dict[int, float] = {}
    control_rows: dict[int, list[float]] = {}
    for t in tests:
        if t.region != region:
            continue
        if t.yield_value > best.get(t.year, 0.0):
            best[t.year] = t.yield_value
        if t.hybrid == control:
            control_rows.setdefault(t.year, []).append(t.yield_value)
    if not control_rows:
        raise TrendError(f"control {control!r} absent in region {region!r}")
    points = []
    for year in sorted(control_rows):
        control_yield = math.fsum(control_rows[year]) / len(control_rows[year])
        points.append((year, best[year] / control_yield))
    return TrendSeries(tuple(points))
