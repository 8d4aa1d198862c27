"""Per-publication ordering metrics.

For a byline of ``n >= 2`` authors:

* ``alphabetical`` -- every consecutive pair is in alphabetical order;
* ``adjacent_pairs`` -- how many of the ``n - 1`` consecutive pairs are;
* ``score`` -- ``2 * adjacent_pairs / (n - 1) - 1``, in ``[-1, 1]``;
* ``intent_estimate`` -- ``(a - 1/n!) / (1 - 1/n!)``, an unbiased
  per-publication estimate of the probability that the authors chose
  alphabetical order on purpose.

Equal adjacent names (a full tie) count as being in order.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .author_names import CanonicalName
from .errors import UndefinedMetricError

__all__ = [
    "DocType",
    "OrderingMetrics",
    "Publication",
    "adjacent_alpha_pairs",
    "alphabetization_score",
    "compute_metrics",
    "incidental_probability",
    "intent_estimate",
    "is_alphabetical",
]


class DocType(str, enum.Enum):
    ARTICLE = "article"
    NOTE = "note"
    REVIEW = "review"
    OTHER = "other"

    @classmethod
    def parse(cls, value: str) -> DocType:
        try:
            return cls(value.strip().lower())
        except ValueError:
            return cls.OTHER


#: Document types included in an analysis unless asked otherwise.
DEFAULT_DOC_TYPES = frozenset({DocType.ARTICLE, DocType.NOTE, DocType.REVIEW})

_WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Publication:
    """One bibliographic record, authors in byline order."""

    id: str
    year: int
    authors: tuple[CanonicalName, ...]
    doc_type: DocType = DocType.ARTICLE
    categories: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if not self.authors:
            raise ValueError(f"publication {self.id!r} has no authors")
        if self.categories:
            total = 0.0
            for label, weight in self.categories:
                if not 0.0 < weight <= 1.0:
                    raise ValueError(f"category weight for {label!r} outside (0, 1]: {weight}")
                total += weight
            if abs(total - 1.0) > _WEIGHT_TOLERANCE:
                raise ValueError(f"category weights of {self.id!r} sum to {total}, not 1")

    @property
    def n_authors(self) -> int:
        return len(self.authors)

    @property
    def has_duplicate_authors(self) -> bool:
        return len(set(self.authors)) < len(self.authors)


@dataclass(frozen=True)
class OrderingMetrics:
    n: int
    alphabetical: bool
    adjacent_pairs: int
    score: float
    intent_estimate: float
    ties: int = 0


def _authors_of(pub: Publication | Sequence[CanonicalName]) -> Sequence[CanonicalName]:
    authors = pub.authors if isinstance(pub, Publication) else pub
    if len(authors) < 2:
        raise UndefinedMetricError(
            f"ordering metrics need at least 2 authors, got {len(authors)}"
        )
    return authors


def adjacent_alpha_pairs(pub: Publication | Sequence[CanonicalName]) -> int:
    """Count consecutive author pairs that are in alphabetical order."""
    authors = _authors_of(pub)
    return sum(1 for a, b in zip(authors, authors[1:]) if a <= b)


def is_alphabetical(pub: Publication | Sequence[CanonicalName]) -> bool:
    authors = _authors_of(pub)
    return all(a <= b for a, b in zip(authors, authors[1:]))


def alphabetization_score(pub: Publication | Sequence[CanonicalName]) -> float:
    authors = _authors_of(pub)
    return _score(adjacent_alpha_pairs(authors), len(authors))


def _score(m: int, n: int) -> float:
    # Integer numerator keeps the result correctly rounded (4 authors, m=2 -> 1/3).
    return (2 * m - (n - 1)) / (n - 1)


# Reciprocal factorials 1/0!, 1/1!, ..., built by iterated division until
# the value underflows to zero.  Every larger n also maps to zero.
def _reciprocal_factorials() -> tuple[float, ...]:
    table = [1.0, 1.0]
    k = 2
    while table[-1] > 0.0:
        table.append(table[-1] / k)
        k += 1
    return tuple(table)


_RECIPROCAL_FACTORIALS = _reciprocal_factorials()
_RECIPROCAL_TABLE = np.array(_RECIPROCAL_FACTORIALS)


def incidental_probability(n: int) -> float:
    """Probability ``1/n!`` that a random byline of ``n`` names is alphabetical.

    Computed as a running product of reciprocals, so large ``n`` underflows
    to 0.0 instead of overflowing.
    """
    if n < 1:
        raise ValueError(f"author count must be >= 1, got {n}")
    if n < len(_RECIPROCAL_FACTORIALS):
        return _RECIPROCAL_FACTORIALS[n]
    return 0.0


def intent_estimate(alphabetical: bool, n: int) -> float:
    """Per-publication estimate of intentional alphabetical ordering.

    Returns exactly 1.0 for alphabetical bylines and ``-1/(n! - 1)`` (a
    small negative number) otherwise.
    """
    if n < 2:
        raise ValueError(f"intent estimate needs n >= 2, got {n}")
    q = incidental_probability(n)
    return (float(alphabetical) - q) / (1.0 - q)


def compute_metrics(pub: Publication | Sequence[CanonicalName]) -> OrderingMetrics:
    """All ordering metrics of one publication in a single pass."""
    authors = _authors_of(pub)
    n = len(authors)
    m = ties = 0
    prev = authors[0]
    for cur in authors[1:]:
        if prev < cur:
            m += 1
        elif prev == cur:
            m += 1
            ties += 1
        prev = cur
    return metrics_for_counts(n, m, ties)


# Metrics depend on (n, m, ties) only, so small bylines share instances.
_METRICS_CACHE: dict[tuple[int, int, int], OrderingMetrics] = {}
_CACHE_MAX_AUTHORS = 100


def metrics_for_counts(n: int, adjacent_pairs: int, ties: int = 0) -> OrderingMetrics:
    """Metrics of an ``n``-author byline with the given pair counts."""
    key = (n, adjacent_pairs, ties)
    cached = _METRICS_CACHE.get(key)
    if cached is not None:
        return cached
    if not 0 <= ties <= adjacent_pairs <= n - 1:
        raise ValueError(f"inconsistent counts n={n}, m={adjacent_pairs}, ties={ties}")
    alphabetical = adjacent_pairs == n - 1
    metrics = OrderingMetrics(
        n=n,
        alphabetical=alphabetical,
        adjacent_pairs=adjacent_pairs,
        score=_score(adjacent_pairs, n),
        intent_estimate=intent_estimate(alphabetical, n),
        ties=ties,
    )
    if n <= _CACHE_MAX_AUTHORS:
        _METRICS_CACHE[key] = metrics
    return metrics


def incidental_probabilities(n: np.ndarray) -> np.ndarray:
    """Vectorized :func:`incidental_probability` for ``n >= 1``."""
    n = np.asarray(n, dtype=np.int64)
    if n.size and n.min() < 1:
        raise ValueError("author counts must be >= 1")
    out = np.zeros(n.shape)
    inside = n < len(_RECIPROCAL_TABLE)
    out[inside] = _RECIPROCAL_TABLE[n[inside]]
    return out


def intent_estimates(alphabetical: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Vectorized :func:`intent_estimate`; same arithmetic, same rounding."""
    n = np.asarray(n, dtype=np.int64)
    if n.size and n.min() < 2:
        raise ValueError("intent estimates need n >= 2")
    q = incidental_probabilities(n)
    return (np.asarray(alphabetical, dtype=np.float64) - q) / (1.0 - q)


def scores(adjacent_pairs: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Vectorized :func:`alphabetization_score`."""
    m = np.asarray(adjacent_pairs, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    return (2 * m - (n - 1)) / (n - 1)


def log10_incidental_probability(n: int) -> float:
    """``log10(1/n!)``; finite where :func:`incidental_probability` underflows."""
    if n < 1:
        raise ValueError(f"author count must be >= 1, got {n}")
    return -math.lgamma(n + 1) / math.log(10)
