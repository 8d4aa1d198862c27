"""Group statistics over publications.

Publications are folded into :class:`GroupAccumulator` objects that keep
weighted sums only, so any partition of a corpus can be accumulated
independently and merged afterwards.  ``finalize`` turns the sums into a
:class:`GroupStats` row of weighted means.  With all weights equal to 1
the intentional share is the plain mean of the per-publication intent
estimates.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from .author_names import has_non_latin
from .order_metrics import OrderingMetrics, Publication, compute_metrics

log = logging.getLogger(__name__)

#: Bylines above this many authors share one hyperauthorship bin.
HYPERAUTHOR_CUTOFF = 50
OVER_CUTOFF_BIN = "over-50"

#: Groups lighter than this are dropped from category reports.
DEFAULT_MIN_WEIGHT = 1000.0

NEGATIVE_INTENT_WARNING = -0.01

STATISTICS = ("weight", "mean_authors", "pct_alphabetical", "pct_intentional", "mean_score")

Year = Union[int, str]
AuthorBin = Union[int, str]


class GroupKey(NamedTuple):
    """Key of a group; unset dimensions are ``None``.

    ``year`` is an int or a pooled ``"start-end"`` label; ``author_bin`` is
    an exact count 2..50 or ``"over-50"``.
    """

    category: str | None = None
    year: Year | None = None
    author_bin: AuthorBin | None = None

    def sort_key(self) -> tuple:
        def part(v):
            if v is None:
                return (0, 0, "")
            if isinstance(v, int):
                return (1, v, "")
            return (2, 0, str(v))

        return (part(self.category), part(self.year), part(self.author_bin))


def author_bin(n: int) -> AuthorBin:
    return n if n <= HYPERAUTHOR_CUTOFF else OVER_CUTOFF_BIN


def pooled_year_label(start: int, end: int) -> str:
    return f"{start}-{end}"


@dataclass(frozen=True)
class GroupStats:
    """Finalized statistics of one group (weighted means)."""

    weight: float
    mean_authors: float
    pct_alphabetical: float
    pct_intentional: float
    mean_score: float
    publications: int = 0

    @property
    def score_minus_intentional(self) -> float:
        """Gap that signals partial alphabetical authorship."""
        return self.mean_score - self.pct_intentional

    def warnings(self, min_weight: float = DEFAULT_MIN_WEIGHT) -> list[str]:
        if self.pct_intentional < NEGATIVE_INTENT_WARNING and self.weight >= min_weight:
            return [
                f"intentional share {self.pct_intentional:.4f} is clearly negative at "
                f"weight {self.weight:.1f}; the random-order model may not fit this group"
            ]
        return []


@dataclass
class GroupAccumulator:
    """Running weighted sums for one group.

    ``merge`` is plain addition of every field, hence associative and
    commutative up to floating-point reassociation.
    """

    weight: float = 0.0
    sum_authors: float = 0.0
    sum_alphabetical: float = 0.0
    sum_intentional: float = 0.0
    sum_score: float = 0.0
    publications: int = 0
    ties: int = 0

    def add(self, metrics: OrderingMetrics, weight: float = 1.0) -> GroupAccumulator:
        if not weight > 0.0:
            raise ValueError(f"publication weight must be positive, got {weight}")
        self.weight += weight
        self.sum_authors += weight * metrics.n
        if metrics.alphabetical:
            self.sum_alphabetical += weight
        self.sum_intentional += weight * metrics.intent_estimate
        self.sum_score += weight * metrics.score
        self.publications += 1
        self.ties += metrics.ties
        return self

    def merge(self, other: GroupAccumulator) -> GroupAccumulator:
        self.weight += other.weight
        self.sum_authors += other.sum_authors
        self.sum_alphabetical += other.sum_alphabetical
        self.sum_intentional += other.sum_intentional
        self.sum_score += other.sum_score
        self.publications += other.publications
        self.ties += other.ties
        return self

    def copy(self) -> GroupAccumulator:
        return GroupAccumulator().merge(self)

    def finalize(self) -> GroupStats:
        w = self.weight
        if w <= 0.0:
            nan = math.nan
            return GroupStats(0.0, nan, nan, nan, nan, self.publications)
        return GroupStats(
            weight=w,
            mean_authors=self.sum_authors / w,
            pct_alphabetical=self.sum_alphabetical / w,
            pct_intentional=self.sum_intentional / w,
            mean_score=self.sum_score / w,
            publications=self.publications,
        )


def accumulate(
    stats: GroupAccumulator, metrics: OrderingMetrics, weight: float = 1.0
) -> GroupAccumulator:
    """Fold one publication's metrics into ``stats`` with fractional ``weight``."""
    if not 0.0 < weight <= 1.0:
        raise ValueError(f"publication weight must be in (0, 1], got {weight}")
    return stats.add(metrics, weight)


def merge_maps(target: dict, other: Mapping) -> dict:
    """Merge accumulator tables (any key type) into ``target`` in place."""
    for key, acc in other.items():
        mine = target.get(key)
        if mine is None:
            target[key] = acc.copy()
        else:
            mine.merge(acc)
    return target


def finalize_all(groups: Mapping[GroupKey, GroupAccumulator]) -> dict[GroupKey, GroupStats]:
    return {k: groups[k].finalize() for k in sorted(groups, key=GroupKey.sort_key)}


def apply_thresholds(
    groups: Mapping[GroupKey, GroupStats], min_weight: float
) -> dict[GroupKey, GroupStats]:
    """Drop groups whose fractional weight is below ``min_weight``.

    The boundary is inclusive: a group of exactly ``min_weight`` is kept.
    """
    if min_weight < 0:
        raise ValueError(f"min_weight must be >= 0, got {min_weight}")
    kept = {k: s for k, s in groups.items() if s.weight >= min_weight}
    dropped = len(groups) - len(kept)
    if dropped:
        log.info(
            "dropped %d of %d groups with weight below %g", dropped, len(groups), min_weight
        )
    return kept


TrendSeries = list[tuple[int, float]]


def trend(
    groups: Mapping[GroupKey, GroupStats],
    statistic: str = "pct_intentional",
    *,
    category: str | None = None,
    author_bin: AuthorBin | None = None,
) -> TrendSeries:
    """Yearly series of ``statistic`` for the groups matching the filter.

    Only keys with a single (integer) year and the requested ``category``
    and ``author_bin`` (``None`` meaning "not split by this dimension") are
    used.  An empty selection gives an empty series.
    """
    if statistic not in STATISTICS and statistic != "score_minus_intentional":
        raise ValueError(f"unknown statistic {statistic!r}")
    points = {
        key.year: getattr(stats, statistic)
        for key, stats in groups.items()
        if isinstance(key.year, int)
        and key.category == category
        and key.author_bin == author_bin
    }
    return sorted(points.items())


def fit_line(series: TrendSeries) -> tuple[float, float]:
    """Ordinary least-squares ``(slope, intercept)`` of value on year."""
    if len(series) < 2:
        raise ValueError("a line fit needs at least 2 points")
    years = np.array([y for y, _ in series], dtype=np.float64)
    values = np.array([v for _, v in series], dtype=np.float64)
    # Centre the years so the normal equations stay well conditioned.
    x0 = float(years.mean())
    dx = years - x0
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise ValueError("a line fit needs at least 2 distinct years")
    slope = float(dx @ (values - values.mean())) / sxx
    intercept = float(values.mean()) - slope * x0
    return slope, intercept


def extrapolate_zero_crossing(series: TrendSeries) -> float | None:
    """Year at which the fitted trend line reaches zero, if it lies ahead.

    Returns ``None`` for a flat or rising line, or when the line already
    crossed zero at or before the last observed year.
    """
    slope, intercept = fit_line(series)
    if not slope < 0.0:
        return None
    crossing = -intercept / slope
    last_year = max(y for y, _ in series)
    if crossing <= last_year:
        return None
    return crossing


def author_count_profile(
    metrics: Iterable[OrderingMetrics | Publication],
) -> dict[AuthorBin, GroupStats]:
    """Statistics per author-count bin (2..50 and ``"over-50"``)."""
    bins: dict[AuthorBin, GroupAccumulator] = defaultdict(GroupAccumulator)
    for item in metrics:
        m = compute_metrics(item) if isinstance(item, Publication) else item
        bins[author_bin(m.n)].add(m)
    return {b: bins[b].finalize() for b in sorted(bins, key=_bin_order)}


@dataclass
class YearTally:
    """Total versus multi-author publication counts for one year."""

    total: int = 0
    multi_author: int = 0

    def merge(self, other: YearTally) -> YearTally:
        self.total += other.total
        self.multi_author += other.multi_author
        return self


@dataclass
class CorpusAggregate:
    """All accumulators an analysis run keeps.

    Memory is bounded by the number of distinct (category, year) and
    author-count groups, never by the number of publications.  Internal
    tables are keyed by plain values; the ``by_*`` properties expose them
    keyed by :class:`GroupKey`.
    """

    years: dict[int, GroupAccumulator] = field(default_factory=dict)
    category_years: dict[tuple[str, int], GroupAccumulator] = field(default_factory=dict)
    author_bins: dict[AuthorBin, GroupAccumulator] = field(default_factory=dict)
    tallies: dict[int, YearTally] = field(default_factory=dict)
    uncategorized: int = 0
    duplicate_author_records: int = 0
    non_latin_records: int = 0

    def add(self, pub: Publication, metrics: OrderingMetrics | None = None) -> None:
        year = pub.year
        tally = self.tallies.get(year)
        if tally is None:
            tally = self.tallies[year] = YearTally()
        tally.total += 1
        authors = pub.authors
        if len(authors) < 2:
            return
        tally.multi_author += 1
        if metrics is None:
            metrics = compute_metrics(authors)
        if metrics.ties or len(set(authors)) < len(authors):
            self.duplicate_author_records += 1
        if not all(map(_ascii_name, authors)):
            self.non_latin_records += 1

        _bump(self.years, year, metrics, 1.0)
        n = metrics.n
        _bump(self.author_bins, n if n <= HYPERAUTHOR_CUTOFF else OVER_CUTOFF_BIN, metrics, 1.0)
        if pub.categories:
            for label, weight in pub.categories:
                _bump(self.category_years, (label, year), metrics, weight)
        else:
            self.uncategorized += 1

    def merge(self, other: CorpusAggregate) -> CorpusAggregate:
        merge_maps(self.years, other.years)
        merge_maps(self.category_years, other.category_years)
        merge_maps(self.author_bins, other.author_bins)
        for year, tally in other.tallies.items():
            mine = self.tallies.get(year)
            if mine is None:
                self.tallies[year] = YearTally(tally.total, tally.multi_author)
            else:
                mine.merge(tally)
        self.uncategorized += other.uncategorized
        self.duplicate_author_records += other.duplicate_author_records
        self.non_latin_records += other.non_latin_records
        return self

    # Keyed views ---------------------------------------------------------

    @property
    def by_year(self) -> dict[GroupKey, GroupAccumulator]:
        return {GroupKey(year=y): self.years[y] for y in sorted(self.years)}

    @property
    def by_category_year(self) -> dict[GroupKey, GroupAccumulator]:
        return {GroupKey(c, y): self.category_years[(c, y)] for c, y in sorted(self.category_years)}

    @property
    def by_author_bin(self) -> dict[GroupKey, GroupAccumulator]:
        order = sorted(self.author_bins, key=_bin_order)
        return {GroupKey(author_bin=b): self.author_bins[b] for b in order}

    def overall(self) -> GroupAccumulator:
        total = GroupAccumulator()
        for year in sorted(self.years):
            total.merge(self.years[year])
        return total

    def by_category_pooled(self) -> dict[GroupKey, GroupAccumulator]:
        """Category groups pooled over every year present."""
        if not self.category_years:
            return {}
        years = [y for _, y in self.category_years]
        label = pooled_year_label(min(years), max(years))
        pooled: dict[GroupKey, GroupAccumulator] = {}
        for cat, year in sorted(self.category_years):
            target = GroupKey(cat, label)
            acc = pooled.get(target)
            if acc is None:
                acc = pooled[target] = GroupAccumulator()
            acc.merge(self.category_years[(cat, year)])
        return pooled

    @property
    def total_publications(self) -> int:
        return sum(t.total for t in self.tallies.values())

    @property
    def multi_author_publications(self) -> int:
        return sum(t.multi_author for t in self.tallies.values())


def _bin_order(b: AuthorBin) -> tuple[int, int]:
    return (1, 0) if isinstance(b, str) else (0, b)


def _ascii_name(name) -> bool:
    return not has_non_latin(name)


def _bump(
    table: dict,
    key,
    metrics: OrderingMetrics,
    weight: float,
) -> None:
    # Hot path of every analysis: GroupAccumulator.add without the checks
    # (weights were validated when the Publication was built).
    acc = table.get(key)
    if acc is None:
        acc = table[key] = GroupAccumulator()
    acc.weight += weight
    acc.sum_authors += weight * metrics.n
    if metrics.alphabetical:
        acc.sum_alphabetical += weight
    acc.sum_intentional += weight * metrics.intent_estimate
    acc.sum_score += weight * metrics.score
    acc.publications += 1
    acc.ties += metrics.ties


def rank_groups(
    groups: Mapping[GroupKey, GroupStats],
    by: str | Callable[[GroupStats], float] = "pct_intentional",
    top: int | None = None,
) -> list[tuple[GroupKey, GroupStats]]:
    """Groups sorted descending by a statistic (name or callable)."""
    getter = (lambda s: getattr(s, by)) if isinstance(by, str) else by
    ranked = sorted(groups.items(), key=lambda kv: (-getter(kv[1]), kv[0].sort_key()))
    return ranked[:top] if top is not None else ranked
