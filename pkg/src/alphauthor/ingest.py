"""Record and aggregate file formats.

Record files
------------
Delimited text (``.csv``; ``.tsv`` for tab-separated) with the header::

    id,year,doc_type,authors,categories

``authors`` lists ``LASTNAME, INITIALS`` entries in byline order separated
by ``;``.  ``categories`` lists subject categories separated by ``;``, each
optionally followed by ``=weight``; without weights a publication is split
evenly over its categories.

Line-delimited JSON (``.jsonl``) carries the same fields, with ``authors``
as a list of ``[last, initials]`` pairs (or ``"LAST, INITIALS"`` strings)
and ``categories`` as a list of labels, ``[label, weight]`` pairs or a
``{label: weight}`` object.

Aggregate files
---------------
CSV with the header given by :data:`AGGREGATE_COLUMNS`.  Shares are
stored as fractions with full ``repr`` precision; the reader also accepts
percent strings such as ``83.3%``.  A pooled period is written in the year
column as ``start-end``.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import logging
import os
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Union

from .aggregation import GroupKey, GroupStats
from .author_names import CanonicalName, RawName, make_canonicalizer
from .errors import FormatError, InvalidNameError
from .order_metrics import DEFAULT_DOC_TYPES, DocType, Publication

log = logging.getLogger(__name__)

RECORD_COLUMNS = ("id", "year", "doc_type", "authors", "categories")
REQUIRED_RECORD_COLUMNS = ("id", "year", "authors")

AGGREGATE_COLUMNS = (
    "category",
    "year",
    "author_bin",
    "weight",
    "publications",
    "mean_authors",
    "pct_alphabetical",
    "pct_intentional",
    "mean_score",
    "score_minus_intentional",
)
REQUIRED_AGGREGATE_COLUMNS = (
    "category",
    "year",
    "mean_authors",
    "pct_alphabetical",
    "pct_intentional",
    "mean_score",
)

Source = Union[str, os.PathLike, IO[str]]


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass(frozen=True)
class ReaderOptions:
    """How to interpret a record file.  Picklable, so workers can share it."""

    format: str = "csv"
    delimiter: str = ","
    #: ``None`` accepts every document type.
    doc_types: frozenset[DocType] | None = DEFAULT_DOC_TYPES
    fold_diacritics: bool = True
    prefix_mode: str = "keep"
    #: Maps our column names to the names used in the file header.
    field_map: Mapping[str, str] = field(default_factory=dict)
    max_diagnostics: int = 1000


def options_for(path: str | os.PathLike | None, **kwargs) -> ReaderOptions:
    """Reader options with format and delimiter guessed from the extension."""
    suffix = Path(path).suffix.lower() if path is not None else ".csv"
    if suffix in (".jsonl", ".ndjson"):
        return ReaderOptions(format="jsonl", **kwargs)
    if suffix == ".tsv":
        return ReaderOptions(format="csv", delimiter="\t", **kwargs)
    return ReaderOptions(**kwargs)


@dataclass
class ParseResult:
    publications: list[Publication] = field(default_factory=list)
    errors: list[RowError] = field(default_factory=list)
    rows: int = 0
    rejected: int = 0
    filtered_doc_type: int = 0

    def merge(self, other: ParseResult, max_diagnostics: int = 1000) -> None:
        room = max_diagnostics - len(self.errors)
        if room > 0:
            self.errors.extend(other.errors[:room])
        self.rows += other.rows
        self.rejected += other.rejected
        self.filtered_doc_type += other.filtered_doc_type


class RowRejected(ValueError):
    pass


def _split_author(entry: str) -> RawName:
    if "," in entry:
        last, initials = entry.split(",", 1)
        return RawName(last.strip(), initials.strip())
    tokens = entry.split()
    # Without a comma a trailing token of 1-3 capitals is read as initials.
    if len(tokens) > 1:
        tail = tokens[-1].replace(".", "")
        if tail.isalpha() and tail.isupper() and len(tail) <= 3:
            return RawName(" ".join(tokens[:-1]), tail)
    return RawName(entry.strip(), "")


def parse_authors(field_value: str) -> list[RawName]:
    return [_split_author(e) for e in field_value.split(";") if e.strip()]


def _normalize_categories(entries: list[tuple[str, float | None]], row_id: str) -> tuple[tuple[str, float], ...]:
    if not entries:
        return ()
    weighted = [w is not None for _, w in entries]
    if all(weighted):
        return tuple((label, float(w)) for label, w in entries)
    if any(weighted):
        raise RowRejected(f"record {row_id!r} mixes weighted and unweighted categories")
    share = 1.0 / len(entries)
    return tuple((label, share) for label, _ in entries)


def parse_categories(field_value: str, row_id: str = "") -> tuple[tuple[str, float], ...]:
    if ";" not in field_value and "=" not in field_value:
        label = field_value.strip()
        return ((label, 1.0),) if label else ()
    entries: list[tuple[str, float | None]] = []
    for part in field_value.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" in part:
            label, w = part.rsplit("=", 1)
            try:
                entries.append((label.strip(), float(w)))
            except ValueError:
                raise RowRejected(f"bad category weight {w!r}") from None
        else:
            entries.append((part, None))
    return _normalize_categories(entries, row_id)


def _canonical_authors(field_value: str, canon) -> tuple[CanonicalName, ...]:
    out = []
    for entry in field_value.split(";"):
        last, sep, initials = entry.partition(",")
        if sep:
            out.append(canon(last.strip(), initials.strip()))
        elif entry.strip():
            out.append(canon(*_split_author(entry)))
    return tuple(out)


_DOC_TYPES = {t.value: t for t in DocType}


def _build(
    options: ReaderOptions,
    row_id: str,
    year_value,
    doc_value,
    raw_authors: list[RawName] | str,
    categories: tuple[tuple[str, float], ...],
) -> Publication | None:
    """Validate one record; ``None`` means filtered out by document type.

    ``raw_authors`` is either parsed names or the raw delimited field.
    """
    doc_type = _DOC_TYPES.get(doc_value) or (DocType.parse(doc_value) if doc_value else DocType.ARTICLE)
    if options.doc_types is not None and doc_type not in options.doc_types:
        return None
    try:
        year = int(year_value)
    except (TypeError, ValueError):
        raise RowRejected(f"bad year {year_value!r}") from None
    canon = _canonicalizer(options)
    try:
        if isinstance(raw_authors, str):
            authors = _canonical_authors(raw_authors, canon)
        else:
            authors = tuple([canon(last, initials) for last, initials in raw_authors])
    except InvalidNameError as exc:
        raise RowRejected(str(exc)) from None
    if not authors:
        raise RowRejected("record has no authors")
    try:
        return Publication(row_id, year, authors, doc_type, categories)
    except ValueError as exc:
        raise RowRejected(str(exc)) from None


@functools.lru_cache(maxsize=8)
def _canonicalizer_for(fold: bool, prefix_mode: str):
    return make_canonicalizer(fold_diacritics=fold, prefix_mode=prefix_mode)


def _canonicalizer(options: ReaderOptions):
    return _canonicalizer_for(options.fold_diacritics, options.prefix_mode)


def _csv_columns(header: list[str], options: ReaderOptions) -> dict[str, int]:
    names = [h.strip() for h in header]
    index = {}
    for col in RECORD_COLUMNS:
        wanted = options.field_map.get(col, col)
        if wanted in names:
            index[col] = names.index(wanted)
    for col in REQUIRED_RECORD_COLUMNS:
        if col not in index:
            raise FormatError(
                f"record file lacks required column {options.field_map.get(col, col)!r}"
            )
    return index


def parse_lines(
    lines: list[str],
    options: ReaderOptions,
    header: list[str] | None = None,
    start_line: int = 1,
) -> ParseResult:
    """Parse a chunk of data lines (no header) into publications.

    ``start_line`` is the 1-based file line number of ``lines[0]``, used in
    diagnostics.  For delimited files ``header`` is the parsed header row.
    """
    result = ParseResult()

    def reject(line_no: int, msg: str) -> None:
        result.rejected += 1
        if len(result.errors) < options.max_diagnostics:
            result.errors.append(RowError(line_no, msg))

    if options.format == "jsonl":
        for offset, line in enumerate(lines):
            if not line.strip():
                continue
            line_no = start_line + offset
            result.rows += 1
            try:
                pub = _parse_json_record(line, options)
            except (RowRejected, json.JSONDecodeError) as exc:
                reject(line_no, str(exc))
                continue
            if pub is None:
                result.filtered_doc_type += 1
            else:
                result.publications.append(pub)
        return result

    if header is None:
        raise ValueError("delimited records need a header")
    cols = _csv_columns(header, options)
    i_id, i_year, i_auth = cols["id"], cols["year"], cols["authors"]
    i_doc = cols.get("doc_type")
    i_cat = cols.get("categories")
    width = len(header)
    for offset, row in enumerate(csv.reader(lines, delimiter=options.delimiter)):
        if not row:
            continue
        line_no = start_line + offset
        result.rows += 1
        if len(row) != width:
            reject(line_no, f"expected {width} fields, found {len(row)}")
            continue
        row_id = row[i_id]
        try:
            cats = parse_categories(row[i_cat], row_id) if i_cat is not None else ()
            pub = _build(
                options,
                row_id,
                row[i_year],
                row[i_doc] if i_doc is not None else "",
                row[i_auth],
                cats,
            )
        except RowRejected as exc:
            reject(line_no, str(exc))
            continue
        if pub is None:
            result.filtered_doc_type += 1
        else:
            result.publications.append(pub)
    return result


def _json_author(entry) -> RawName:
    if isinstance(entry, str):
        return _split_author(entry)
    if isinstance(entry, dict):
        return RawName(str(entry.get("last", "")), str(entry.get("initials", "") or ""))
    if isinstance(entry, (list, tuple)) and 1 <= len(entry) <= 2:
        return RawName(str(entry[0]), str(entry[1]) if len(entry) > 1 and entry[1] else "")
    raise RowRejected(f"cannot read author entry {entry!r}")


def _json_categories(value, row_id: str) -> tuple[tuple[str, float], ...]:
    if value is None:
        return ()
    if isinstance(value, dict):
        entries = [(str(k), None if v is None else float(v)) for k, v in value.items()]
    else:
        entries = []
        for item in value:
            if isinstance(item, str):
                entries.append((item, None))
            elif isinstance(item, dict):
                w = item.get("weight")
                entries.append((str(item["label"]), None if w is None else float(w)))
            else:
                label, w = item
                entries.append((str(label), None if w is None else float(w)))
    return _normalize_categories(entries, row_id)


def _parse_json_record(line: str, options: ReaderOptions) -> Publication | None:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise RowRejected("record is not a JSON object")
    fm = options.field_map

    def get(name, default=None):
        return obj.get(fm.get(name, name), default)

    row_id = str(get("id", ""))
    authors = get("authors")
    if authors is None:
        raise RowRejected("record has no authors field")
    if isinstance(authors, str):
        raw = parse_authors(authors)
    else:
        raw = [_json_author(a) for a in authors]
    cats_value = get("categories")
    if isinstance(cats_value, str):
        cats = parse_categories(cats_value, row_id)
    else:
        try:
            cats = _json_categories(cats_value, row_id)
        except (TypeError, ValueError, KeyError) as exc:
            raise RowRejected(f"bad categories: {exc}") from None
    return _build(options, row_id, get("year"), get("doc_type") or "", raw, cats)


# Streaming --------------------------------------------------------------


def _open_text(source: Source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8-sig", newline=""), True
    return source, False


def iter_chunks(
    source: Source, options: ReaderOptions, chunk_size: int = 20_000
) -> tuple[list[str] | None, Iterator[tuple[int, list[str]]]]:
    """Split a record file into ``(start_line, lines)`` chunks.

    Returns the parsed header (``None`` for JSON lines) and a lazy chunk
    iterator; only one chunk is held in memory at a time.  Delimited files
    must keep each record on one line.
    """
    fh, owned = _open_text(source)
    first = fh.readline()
    if first.startswith("﻿"):
        first = first[1:]
    header = None
    start = 1
    pending: list[str] = []
    if options.format == "csv":
        if not first:
            if owned:
                fh.close()
            raise FormatError("record file is empty (no header row)")
        header = next(csv.reader([first], delimiter=options.delimiter))
        _csv_columns(header, options)
        start = 2
    elif first:
        pending.append(first)

    def chunks() -> Iterator[tuple[int, list[str]]]:
        line_no = start
        buf = pending
        try:
            for line in fh:
                buf.append(line)
                if len(buf) >= chunk_size:
                    yield line_no, buf
                    line_no += len(buf)
                    buf = []
            if buf:
                yield line_no, buf
        finally:
            if owned:
                fh.close()

    return header, chunks()


class RecordReader:
    """Iterate over the valid publications of a record file.

    Malformed rows are skipped and reported in :attr:`errors` (with file
    line numbers, capped at ``options.max_diagnostics``); counters keep the
    full totals.
    """

    def __init__(self, source: Source, options: ReaderOptions | None = None, chunk_size: int = 20_000):
        if options is None:
            path = source if isinstance(source, (str, os.PathLike)) else None
            options = options_for(path)
        self.options = options
        self.source = source
        self.chunk_size = chunk_size
        self.stats = ParseResult()

    @property
    def errors(self) -> list[RowError]:
        return self.stats.errors

    def __iter__(self) -> Iterator[Publication]:
        header, chunks = iter_chunks(self.source, self.options, self.chunk_size)
        for start, lines in chunks:
            part = parse_lines(lines, self.options, header, start)
            self.stats.merge(part, self.options.max_diagnostics)
            for err in part.errors:
                log.debug("line %d: %s", err.line, err.message)
            yield from part.publications


def read_records(source: Source, options: ReaderOptions | None = None) -> RecordReader:
    return RecordReader(source, options)


# Writing records -------------------------------------------------------------


def _format_weight(w: float) -> str:
    return repr(float(w))


def format_authors(pub: Publication) -> str:
    return "; ".join(
        f"{a.key_last}, {a.key_initials}" if a.key_initials else a.key_last for a in pub.authors
    )


def format_categories(pub: Publication) -> str:
    """Category field; weights are spelled out only for uneven splits."""
    cats = pub.categories
    if not cats:
        return ""
    share = 1.0 / len(cats)
    if all(w == share for _, w in cats):
        return "; ".join(label for label, _ in cats)
    return "; ".join(f"{label}={_format_weight(w)}" for label, w in cats)


def _open_out(target: Source) -> tuple[IO[str], bool]:
    if isinstance(target, (str, os.PathLike)):
        return open(target, "w", encoding="utf-8", newline=""), True
    return target, False


def write_records(
    publications: Iterable[Publication], target: Source, format: str | None = None
) -> int:
    """Write publications as a record file; returns the number written."""
    if format is None:
        path = target if isinstance(target, (str, os.PathLike)) else None
        opts = options_for(path)
        format, delimiter = opts.format, opts.delimiter
    else:
        delimiter = "\t" if format == "tsv" else ","
        format = "jsonl" if format == "jsonl" else "csv"
    fh, owned = _open_out(target)
    count = 0
    try:
        if format == "jsonl":
            for pub in publications:
                fh.write(
                    json.dumps(
                        {
                            "id": pub.id,
                            "year": pub.year,
                            "doc_type": pub.doc_type.value,
                            "authors": [[a.key_last, a.key_initials] for a in pub.authors],
                            "categories": [[label, w] for label, w in pub.categories],
                        },
                        ensure_ascii=False,
                    )
                )
                fh.write("\n")
                count += 1
        else:
            writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
            writer.writerow(RECORD_COLUMNS)
            for pub in publications:
                writer.writerow(
                    (pub.id, pub.year, pub.doc_type.value, format_authors(pub), format_categories(pub))
                )
                count += 1
    finally:
        if owned:
            fh.close()
    return count


# Aggregate files -------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_aggregates(groups: Mapping[GroupKey, GroupStats], target: Source) -> None:
    """Write group statistics, one row per key, full precision."""
    fh, owned = _open_out(target)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for key in sorted(groups, key=GroupKey.sort_key):
            s = groups[key]
            writer.writerow(
                [
                    _fmt(key.category),
                    _fmt(key.year),
                    _fmt(key.author_bin),
                    _fmt(float(s.weight)),
                    _fmt(int(s.publications)),
                    _fmt(float(s.mean_authors)),
                    _fmt(float(s.pct_alphabetical)),
                    _fmt(float(s.pct_intentional)),
                    _fmt(float(s.mean_score)),
                    _fmt(float(s.score_minus_intentional)),
                ]
            )
    finally:
        if owned:
            fh.close()


def aggregates_to_string(groups: Mapping[GroupKey, GroupStats]) -> str:
    buf = io.StringIO()
    write_aggregates(groups, buf)
    return buf.getvalue()


def _parse_share(text: str, column: str, line: int) -> float:
    t = text.strip()
    try:
        if t.endswith("%"):
            return float(t[:-1]) / 100.0
        return float(t)
    except ValueError:
        raise FormatError(f"line {line}: column {column!r} has non-numeric value {text!r}") from None


def _parse_key_part(text: str) -> int | str | None:
    t = text.strip()
    if not t:
        return None
    if t.isdigit():
        return int(t)
    return t


def read_aggregates(
    source: Source, field_map: Mapping[str, str] | None = None
) -> dict[GroupKey, GroupStats]:
    """Read an aggregate file back into ``{GroupKey: GroupStats}``.

    ``field_map`` renames columns (ours -> file header), which lets the
    reader take tables that use different headings.  Missing ``weight``
    is read as NaN and missing ``publications`` as 0.

    Raises:
        FormatError: A required column is missing, a value does not parse,
            or a key occurs twice.
    """
    field_map = dict(field_map or {})
    fh, owned = _open_text(source)
    try:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lstrip("﻿") for h in next(reader)]
        except StopIteration:
            raise FormatError("aggregate file is empty (no header row)") from None
        index = {}
        for col in AGGREGATE_COLUMNS:
            name = field_map.get(col, col)
            if name in header:
                index[col] = header.index(name)
        for col in REQUIRED_AGGREGATE_COLUMNS:
            if col not in index:
                raise FormatError(f"aggregate file lacks column {field_map.get(col, col)!r}")
        groups: dict[GroupKey, GroupStats] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"line {line_no}: expected {len(header)} fields, found {len(row)}")

            def cell(col, default=None):
                i = index.get(col)
                return row[i] if i is not None else default

            key = GroupKey(
                category=cell("category").strip() or None,
                year=_parse_key_part(cell("year")),
                author_bin=_parse_key_part(cell("author_bin", "")),
            )
            if key in groups:
                raise FormatError(f"line {line_no}: duplicate group {key}")
            weight_text = cell("weight")
            pubs_text = cell("publications")
            try:
                publications = int(pubs_text) if pubs_text not in (None, "") else 0
            except ValueError:
                raise FormatError(
                    f"line {line_no}: column 'publications' has non-integer value {pubs_text!r}"
                ) from None
            groups[key] = GroupStats(
                weight=_parse_share(weight_text, "weight", line_no)
                if weight_text not in (None, "")
                else float("nan"),
                mean_authors=_parse_share(cell("mean_authors"), "mean_authors", line_no),
                pct_alphabetical=_parse_share(cell("pct_alphabetical"), "pct_alphabetical", line_no),
                pct_intentional=_parse_share(cell("pct_intentional"), "pct_intentional", line_no),
                mean_score=_parse_share(cell("mean_score"), "mean_score", line_no),
                publications=publications,
            )
        return groups
    finally:
        if owned:
            fh.close()
