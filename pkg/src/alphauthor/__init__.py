"""Measure the use of alphabetical authorship in bibliographic corpora."""

from .aggregation import (
    CorpusAggregate,
    GroupAccumulator,
    GroupKey,
    GroupStats,
    accumulate,
    apply_thresholds,
    author_count_profile,
    extrapolate_zero_crossing,
    trend,
)
from .author_names import CanonicalName, Ordering, RawName, canonicalize, compare
from .order_metrics import (
    DocType,
    OrderingMetrics,
    Publication,
    adjacent_alpha_pairs,
    alphabetization_score,
    compute_metrics,
    incidental_probability,
    intent_estimate,
    is_alphabetical,
)
from .synthetic import (
    AuthorCountLaw,
    Mode,
    SyntheticConfig,
    generate_corpus,
    generate_publication,
    incidental_curve,
    validate_estimator,
)

__version__ = "0.1.0"
