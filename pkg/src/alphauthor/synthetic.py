"""Synthetic corpora drawn from the authorship-order choice model.

Each publication with ``n`` authors lists its names alphabetically with
probability ``p`` (intentional), and otherwise uses a non-alphabetical
criterion under which every ordering is equally likely.  The ``partial``
mode replaces that second branch by "lead author(s) first, the rest in
alphabetical order", which the intent estimator is not built for.

Generation works in *rank space*: a byline is a permutation of the ranks
``0..n-1`` of its authors' names in alphabetical order.  Ranks are all the
estimator needs, so validation runs fully vectorized; names are only
materialized when a corpus is written out.

Randomness comes from numpy's PCG64, one independent stream per
(replication, block of publications, purpose), derived with
``SeedSequence(seed, spawn_key=...)``.  Streams never depend on how many
workers consume them.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterator
from dataclasses import asdict, dataclass, field

import numpy as np

from .author_names import CanonicalName
from .order_metrics import (
    DocType,
    Publication,
    incidental_probabilities,
    incidental_probability,
    intent_estimates,
    scores,
)

RNG_ALGORITHM = "numpy PCG64 via SeedSequence(seed, spawn_key=(replication, block, stream))"
BLOCK_SIZE = 1 << 16
NAME_LENGTH = 8

_ORDER_STREAM = 0
_NAME_STREAM = 1
_META_STREAM = 2
_ALPHABET = np.frombuffer(b"ABCDEFGHIJKLMNOPQRSTUVWXYZ", dtype=np.uint8)


class Mode(str, enum.Enum):
    PURE = "pure"
    PARTIAL = "partial"


@dataclass(frozen=True)
class AuthorCountLaw:
    """Distribution of the number of authors per publication.

    ``kind`` is ``"fixed"`` (``low``), ``"uniform"`` (integers ``low..high``
    inclusive) or ``"histogram"`` (``counts`` with matching ``probabilities``).
    """

    kind: str = "fixed"
    low: int = 2
    high: int = 2
    counts: tuple[int, ...] = ()
    probabilities: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "fixed":
            object.__setattr__(self, "high", self.low)
        if self.kind in ("fixed", "uniform"):
            if self.low < 2 or self.high < self.low:
                raise ValueError(f"author counts must satisfy 2 <= low <= high, got {self.low}..{self.high}")
        elif self.kind == "histogram":
            if not self.counts or len(self.counts) != len(self.probabilities):
                raise ValueError("histogram law needs matching counts and probabilities")
            if min(self.counts) < 2:
                raise ValueError("histogram author counts must be >= 2")
            if min(self.probabilities) < 0 or not math.isclose(sum(self.probabilities), 1.0, abs_tol=1e-9):
                raise ValueError("histogram probabilities must be non-negative and sum to 1")
        else:
            raise ValueError(f"unknown author count law {self.kind!r}")

    @classmethod
    def fixed(cls, n: int) -> AuthorCountLaw:
        return cls("fixed", n, n)

    @classmethod
    def uniform(cls, low: int, high: int) -> AuthorCountLaw:
        return cls("uniform", low, high)

    @classmethod
    def histogram(cls, weights: dict[int, float]) -> AuthorCountLaw:
        total = float(sum(weights.values()))
        counts = tuple(sorted(weights))
        return cls("histogram", counts=counts, probabilities=tuple(weights[c] / total for c in counts))

    @classmethod
    def parse(cls, text: str) -> AuthorCountLaw:
        """Parse ``"3"``, ``"2-10"`` or ``"2:0.6,3:0.3,4:0.1"``."""
        text = text.strip()
        if ":" in text:
            weights = {}
            for part in text.split(","):
                n, w = part.split(":")
                weights[int(n)] = float(w)
            return cls.histogram(weights)
        if "-" in text:
            lo, hi = text.split("-")
            return cls.uniform(int(lo), int(hi))
        return cls.fixed(int(text))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "fixed":
            return np.full(size, self.low, dtype=np.int64)
        if self.kind == "uniform":
            return rng.integers(self.low, self.high + 1, size=size, dtype=np.int64)
        return rng.choice(np.array(self.counts, dtype=np.int64), size=size, p=self.probabilities)

    def support(self) -> list[int]:
        if self.kind == "histogram":
            return [c for c, p in zip(self.counts, self.probabilities) if p > 0]
        return list(range(self.low, self.high + 1))


@dataclass(frozen=True)
class SyntheticConfig:
    publication_count: int
    intent_probability: float = 0.0
    author_count_law: AuthorCountLaw = field(default_factory=AuthorCountLaw)
    mode: Mode = Mode.PURE
    seed: int = 0
    lead_count: int = 1
    #: ``None`` keeps p constant; otherwise p_i ~ Beta(p*c, (1-p)*c).
    intent_concentration: float | None = None
    years: tuple[int, int] = (2011, 2011)
    categories: tuple[str, ...] = ("Synthetic",)
    #: Share of publications assigned to a second category (0.5/0.5 split).
    second_category_rate: float = 0.0

    def __post_init__(self):
        if self.publication_count < 0:
            raise ValueError("publication_count must be >= 0")
        if not 0.0 <= self.intent_probability <= 1.0:
            raise ValueError(f"intent_probability must be in [0, 1], got {self.intent_probability}")
        if self.lead_count < 1:
            raise ValueError("lead_count must be >= 1")
        if self.intent_concentration is not None and self.intent_concentration <= 0:
            raise ValueError("intent_concentration must be positive")
        if self.years[0] > self.years[1]:
            raise ValueError("years must be an ascending (start, end) pair")
        if not self.categories:
            raise ValueError("at least one category label is needed")
        if self.second_category_rate > 0 and len(self.categories) < 2:
            raise ValueError("a second category needs at least two category labels")
        object.__setattr__(self, "mode", Mode(self.mode))


def stream(seed: int, replication: int, block: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(replication, block, purpose))
    return np.random.Generator(np.random.PCG64(ss))


def generate_orderings(
    rng: np.random.Generator,
    n: int,
    intentional: np.ndarray,
    mode: Mode | str = Mode.PURE,
    lead_count: int = 1,
) -> np.ndarray:
    """Bylines in rank space, one row per publication.

    Row ``i`` lists the alphabetical ranks of the authors in byline order;
    intentional rows are the identity permutation.  Non-intentional rows
    are uniform random permutations (pure mode) or ``lead_count`` randomly
    chosen leads followed by the remaining ranks in ascending order.
    """
    intentional = np.asarray(intentional, dtype=bool)
    k = intentional.shape[0]
    orders = np.argsort(rng.random((k, n)), axis=1, kind="stable")
    if Mode(mode) is Mode.PARTIAL and lead_count < n:
        orders[:, lead_count:] = np.sort(orders[:, lead_count:], axis=1)
    orders[intentional] = np.arange(n)
    return orders


@dataclass
class RankBlock:
    """One block of synthetic publications, authors as ranks."""

    n: np.ndarray
    p: np.ndarray
    intentional: np.ndarray
    #: author count -> (row indices, orderings of shape (rows, n))
    orderings: dict[int, tuple[np.ndarray, np.ndarray]]

    def alphabetical(self) -> np.ndarray:
        out = np.zeros(self.n.shape[0], dtype=bool)
        for n, (rows, orders) in self.orderings.items():
            out[rows] = np.all(orders == np.arange(n), axis=1)
        return out

    def adjacent_pairs(self) -> np.ndarray:
        out = np.zeros(self.n.shape[0], dtype=np.int64)
        for _, (rows, orders) in self.orderings.items():
            out[rows] = np.count_nonzero(np.diff(orders, axis=1) > 0, axis=1)
        return out


def _draw_intent(config: SyntheticConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    p = config.intent_probability
    if config.intent_concentration is None or p in (0.0, 1.0):
        return np.full(size, p)
    c = config.intent_concentration
    return rng.beta(p * c, (1.0 - p) * c, size=size)


def generate_rank_block(
    config: SyntheticConfig, block: int, size: int, replication: int = 0
) -> RankBlock:
    rng = stream(config.seed, replication, block, _ORDER_STREAM)
    n = config.author_count_law.sample(rng, size)
    p = _draw_intent(config, rng, size)
    intentional = rng.random(size) < p
    orderings = {}
    for k in np.unique(n):
        rows = np.flatnonzero(n == k)
        orderings[int(k)] = (
            rows,
            generate_orderings(rng, int(k), intentional[rows], config.mode, config.lead_count),
        )
    return RankBlock(n=n, p=p, intentional=intentional, orderings=orderings)


def _block_sizes(total: int) -> Iterator[tuple[int, int]]:
    block = 0
    remaining = total
    while remaining > 0:
        size = min(BLOCK_SIZE, remaining)
        yield block, size
        block += 1
        remaining -= size


def _random_names(rng: np.random.Generator, count: int) -> list[str]:
    letters = _ALPHABET[rng.integers(0, 26, size=(count, NAME_LENGTH))]
    return [s.decode("ascii") for s in letters.view(f"S{NAME_LENGTH}").ravel()]


def _distinct_names(rng: np.random.Generator, names: list[str], initials: list[str]) -> list[CanonicalName]:
    """Sorted distinct names; colliding last names are redrawn."""
    while len(set(names)) < len(names):
        seen = set()
        for i, name in enumerate(names):
            while name in seen:
                name = _random_names(rng, 1)[0]
            names[i] = name
            seen.add(name)
    return sorted(CanonicalName(a, b) for a, b in zip(names, initials))


@dataclass(frozen=True)
class SyntheticRecord:
    """A generated publication together with its ground truth."""

    publication: Publication
    intent_probability: float
    intentional: bool


def generate_records(config: SyntheticConfig, replication: int = 0) -> Iterator[SyntheticRecord]:
    """Generate the corpus described by ``config``, deterministically."""
    width = len(str(max(config.publication_count - 1, 0)))
    labels = config.categories
    for block, size in _block_sizes(config.publication_count):
        ranks = generate_rank_block(config, block, size, replication)
        names_rng = stream(config.seed, replication, block, _NAME_STREAM)
        meta_rng = stream(config.seed, replication, block, _META_STREAM)
        total_authors = int(ranks.n.sum())
        last_names = _random_names(names_rng, total_authors)
        initials = [chr(65 + c) for c in names_rng.integers(0, 26, size=total_authors)]
        years = meta_rng.integers(config.years[0], config.years[1] + 1, size=size)
        first_cat = meta_rng.integers(0, len(labels), size=size)
        second = meta_rng.random(size) < config.second_category_rate
        offset_cat = meta_rng.integers(1, max(len(labels), 2), size=size)

        row_orders: list[np.ndarray | None] = [None] * size
        for _, (rows, orders) in ranks.orderings.items():
            for r, order in zip(rows.tolist(), orders):
                row_orders[r] = order

        start = 0
        base = block * BLOCK_SIZE
        for i in range(size):
            n = int(ranks.n[i])
            names = _distinct_names(
                names_rng, last_names[start : start + n], initials[start : start + n]
            )
            start += n
            byline = tuple(names[r] for r in row_orders[i].tolist())
            c0 = int(first_cat[i])
            if second[i]:
                c1 = (c0 + int(offset_cat[i])) % len(labels)
                cats = ((labels[c0], 0.5), (labels[c1], 0.5))
            else:
                cats = ((labels[c0], 1.0),)
            pub = Publication(
                id=f"S{base + i:0{width}d}",
                year=int(years[i]),
                authors=byline,
                doc_type=DocType.ARTICLE,
                categories=cats,
            )
            yield SyntheticRecord(pub, float(ranks.p[i]), bool(ranks.intentional[i]))


def generate_corpus(config: SyntheticConfig, replication: int = 0) -> Iterator[Publication]:
    for record in generate_records(config, replication):
        yield record.publication


def generate_publication(
    n: int,
    p: float,
    mode: Mode | str = Mode.PURE,
    rng: np.random.Generator | None = None,
    *,
    lead_count: int = 1,
    id: str = "S0",
    year: int = 2011,
) -> Publication:
    """Draw a single publication from the model."""
    if n < 2:
        raise ValueError(f"a synthetic publication needs n >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = rng if rng is not None else np.random.default_rng()
    intentional = np.array([rng.random() < p])
    order = generate_orderings(rng, n, intentional, mode, lead_count)[0]
    names = _distinct_names(
        rng, _random_names(rng, n), [chr(65 + c) for c in rng.integers(0, 26, size=n)]
    )
    return Publication(
        id=id,
        year=year,
        authors=tuple(names[r] for r in order.tolist()),
        categories=(("Synthetic", 1.0),),
    )


def incidental_curve(n_max: int) -> list[tuple[int, float]]:
    """``(n, 1/n!)`` for ``n = 2..n_max``."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    return [(n, incidental_probability(n)) for n in range(2, n_max + 1)]


# Validation ---------------------------------------------------------------


@dataclass
class _Sums:
    count: int = 0
    p: float = 0.0
    estimate: float = 0.0
    estimate_sq: float = 0.0
    alphabetical: float = 0.0
    expected_alphabetical: float = 0.0
    score: float = 0.0
    score_sq: float = 0.0

    def add_block(self, block: RankBlock) -> None:
        a = block.alphabetical()
        est = intent_estimates(a, block.n)
        s = scores(block.adjacent_pairs(), block.n)
        q = incidental_probabilities(block.n)
        self.count += block.n.shape[0]
        self.p += float(block.p.sum())
        self.estimate += float(est.sum())
        self.estimate_sq += float(est @ est)
        self.alphabetical += float(a.sum())
        self.expected_alphabetical += float((block.p + (1.0 - block.p) * q).sum())
        self.score += float(s.sum())
        self.score_sq += float(s @ s)


@dataclass
class CheckResult:
    expected: float
    observed: float
    standard_error: float
    passed: bool

    @property
    def z(self) -> float:
        diff = self.observed - self.expected
        if self.standard_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.standard_error


# Float slack for comparisons where the standard error is exactly zero.
_ROUNDING_SLACK = 1e-12


def _check(expected: float, observed: float, se: float, k: float) -> CheckResult:
    return CheckResult(expected, observed, se, abs(observed - expected) <= k * se + _ROUNDING_SLACK)


@dataclass
class ValidationReport:
    config: dict
    replications: int
    rng_algorithm: str
    #: True mean intent probability (mean of p_i over all draws).
    true_p: float
    estimator: CheckResult
    alphabetical: CheckResult
    mean_score: float
    mean_score_se: float
    replication_estimates: list[float]
    model_violated: bool
    sigma: float = 3.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.estimator.passed and self.alphabetical.passed

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        out["estimator"]["z"] = self.estimator.z
        out["alphabetical"]["z"] = self.alphabetical.z
        return out

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        lines = [
            f"estimator validation: {verdict} ({self.replications} replications, "
            f"{self.config['publication_count']} publications each, mode {self.config['mode']})",
            f"  true p            {self.true_p:.6f}",
            f"  mean estimate     {self.estimator.observed:.6f}  SE {self.estimator.standard_error:.2e}"
            f"  z {self.estimator.z:+.2f}  {'ok' if self.estimator.passed else 'MISS'}",
            f"  Pr(alphabetical)  {self.alphabetical.observed:.6f}  expected {self.alphabetical.expected:.6f}"
            f"  SE {self.alphabetical.standard_error:.2e}  {'ok' if self.alphabetical.passed else 'MISS'}",
            f"  mean score        {self.mean_score:.6f}  SE {self.mean_score_se:.2e}",
            f"  rng               {self.rng_algorithm}",
        ]
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def _standard_error(per_rep: np.ndarray, sums: _Sums, which: str) -> float:
    if per_rep.shape[0] >= 2:
        return float(per_rep.std(ddof=1) / math.sqrt(per_rep.shape[0]))
    # One replication: fall back to the within-corpus standard error.
    n = sums.count
    if n < 2:
        return 0.0
    total, total_sq = (sums.estimate, sums.estimate_sq) if which == "estimate" else (sums.score, sums.score_sq)
    var = max(total_sq - total * total / n, 0.0) / (n - 1)
    return math.sqrt(var / n)


def validate_estimator(
    config: SyntheticConfig, replications: int = 1, *, sigma: float = 3.0
) -> ValidationReport:
    """Monte Carlo check that the intent estimator is unbiased.

    Every replication draws a fresh corpus from ``config`` and records the
    corpus-level estimate.  The mean estimate must lie within ``sigma``
    standard errors of the true mean intent probability, and the share of
    alphabetical bylines within ``sigma`` standard errors of its model
    value ``p + (1 - p)/n!``.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if config.publication_count < 1:
        raise ValueError("validation needs at least one publication per replication")
    est_r = np.empty(replications)
    p_r = np.empty(replications)
    a_r = np.empty(replications)
    ea_r = np.empty(replications)
    s_r = np.empty(replications)
    total = _Sums()
    for r in range(replications):
        sums = _Sums()
        for block, size in _block_sizes(config.publication_count):
            sums.add_block(generate_rank_block(config, block, size, r))
        c = sums.count
        est_r[r] = sums.estimate / c
        p_r[r] = sums.p / c
        a_r[r] = sums.alphabetical / c
        ea_r[r] = sums.expected_alphabetical / c
        s_r[r] = sums.score / c
        for name in ("count", "p", "estimate", "estimate_sq", "alphabetical",
                     "expected_alphabetical", "score", "score_sq"):
            setattr(total, name, getattr(total, name) + getattr(sums, name))

    true_p = float(p_r.mean())
    est_se = _standard_error(est_r, total, "estimate")
    # The alphabetical share is checked against its model value per
    # replication, so the spread of the difference is what matters.
    diff_a = a_r - ea_r
    if replications >= 2:
        a_se = float(diff_a.std(ddof=1) / math.sqrt(replications))
    else:
        pi = total.expected_alphabetical / total.count
        a_se = math.sqrt(max(pi * (1 - pi), 0.0) / total.count)
    mode = Mode(config.mode)
    notes = []
    if mode is Mode.PARTIAL:
        notes.append(
            "partial mode breaks the random-order assumption; the estimator is not expected to match p"
        )
    cfg = asdict(config)
    cfg["mode"] = mode.value
    return ValidationReport(
        config=cfg,
        replications=replications,
        rng_algorithm=RNG_ALGORITHM,
        true_p=true_p,
        estimator=_check(true_p, float(est_r.mean()), est_se, sigma),
        alphabetical=_check(float(ea_r.mean()), float(a_r.mean()), a_se, sigma),
        mean_score=float(s_r.mean()),
        mean_score_se=_standard_error(s_r, total, "score"),
        replication_estimates=est_r.tolist(),
        model_violated=mode is Mode.PARTIAL,
        sigma=sigma,
        notes=notes,
    )
