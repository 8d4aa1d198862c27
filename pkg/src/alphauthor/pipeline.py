"""Chunked analysis of record files, sequential or across worker processes.

A file is cut into fixed-size line chunks.  Each chunk is parsed and
folded into its own :class:`CorpusAggregate`, and the partial aggregates
are merged in file order.  Because the chunking and the merge order do
not depend on the worker count, every worker count produces bit-identical
aggregates.  At most ``2 * workers`` chunks are in flight, which bounds
memory no matter how large the file is.
"""

from __future__ import annotations

import logging
import os
from collections import deque
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .aggregation import CorpusAggregate
from .ingest import ParseResult, ReaderOptions, Source, iter_chunks, parse_lines
from .order_metrics import Publication

log = logging.getLogger(__name__)

WORKERS_ENV = "ALPHAUTHOR_WORKERS"
DEFAULT_CHUNK_SIZE = 20_000


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", WORKERS_ENV, value)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class AnalysisOptions:
    reader: ReaderOptions = field(default_factory=ReaderOptions)
    #: Inclusive (start, end) year filter; ``None`` keeps every year.
    years: tuple[int, int] | None = None


@dataclass
class AnalysisResult:
    aggregate: CorpusAggregate = field(default_factory=CorpusAggregate)
    parse: ParseResult = field(default_factory=ParseResult)
    filtered_year: int = 0

    def merge(self, other: AnalysisResult, max_diagnostics: int) -> None:
        self.aggregate.merge(other.aggregate)
        self.parse.merge(other.parse, max_diagnostics)
        self.filtered_year += other.filtered_year


def analyze_publications(
    publications: Iterable[Publication], years: tuple[int, int] | None = None
) -> AnalysisResult:
    result = AnalysisResult()
    agg = result.aggregate
    for pub in publications:
        if years is not None and not years[0] <= pub.year <= years[1]:
            result.filtered_year += 1
            continue
        agg.add(pub)
    return result


def _analyze_chunk(
    lines: list[str], header: list[str] | None, start: int, options: AnalysisOptions
) -> AnalysisResult:
    parsed = parse_lines(lines, options.reader, header, start)
    result = analyze_publications(parsed.publications, options.years)
    parsed.publications = []
    result.parse = parsed
    return result


def analyze_file(
    source: Source,
    options: AnalysisOptions | None = None,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> AnalysisResult:
    """Aggregate a record file with ``workers`` processes."""
    options = options or AnalysisOptions()
    header, chunks = iter_chunks(source, options.reader, chunk_size)
    total = AnalysisResult()
    cap = options.reader.max_diagnostics
    done = 0
    if workers <= 1:
        for start, lines in chunks:
            total.merge(_analyze_chunk(lines, header, start, options), cap)
            done += 1
            if done % 50 == 0:
                log.info("processed %d chunks", done)
        return total

    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = deque()
        for start, lines in chunks:
            pending.append(pool.submit(_analyze_chunk, lines, header, start, options))
            if len(pending) >= 2 * workers:
                total.merge(pending.popleft().result(), cap)
                done += 1
                if done % 50 == 0:
                    log.info("processed %d chunks", done)
        while pending:
            total.merge(pending.popleft().result(), cap)
    return total
