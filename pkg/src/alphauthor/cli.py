"""Command-line interface.

Subcommands: ``analyze``, ``trends``, ``score``, ``simulate``, ``validate``
and ``curve``.  Data goes to stdout, progress and diagnostics to stderr.

Exit codes: 0 success, 1 unexpected error, 2 usage error, 3 I/O error,
4 format error, 5 estimator validation failure, 6 empty corpus after
filtering.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from collections.abc import Sequence
from pathlib import Path

from . import __version__
from .aggregation import (
    DEFAULT_MIN_WEIGHT,
    STATISTICS,
    GroupKey,
    GroupStats,
    apply_thresholds,
    extrapolate_zero_crossing,
    finalize_all,
    rank_groups,
    trend,
)
from .errors import (
    EXIT_ERROR,
    EXIT_IO,
    AlphauthorError,
    EmptyCorpusError,
    ValidationFailure,
)
from .ingest import RecordReader, options_for, read_aggregates, write_aggregates, write_records
from .order_metrics import DEFAULT_DOC_TYPES, DocType, compute_metrics
from .pipeline import DEFAULT_CHUNK_SIZE, AnalysisOptions, analyze_file, default_workers
from .synthetic import AuthorCountLaw, Mode, SyntheticConfig, generate_corpus, incidental_curve, validate_estimator

log = logging.getLogger("alphauthor")


# Argument helpers -------------------------------------------------------


def _year_range(text: str) -> tuple[int, int]:
    try:
        if "-" in text:
            a, b = text.split("-", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a year or year range: {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"year range runs backwards: {text!r}")
    return lo, hi


def _doc_types(text: str) -> frozenset[DocType] | None:
    if text.strip().lower() == "all":
        return None
    out = set()
    for part in text.split(","):
        part = part.strip().lower()
        try:
            out.add(DocType(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"unknown document type {part!r}") from None
    return frozenset(out)


def _author_law(text: str) -> AuthorCountLaw:
    try:
        return AuthorCountLaw.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _probability(text: str) -> float:
    p = float(text)
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must be in [0, 1], got {p}")
    return p


def _add_reader_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", type=Path, help="record file (.csv, .tsv or .jsonl)")
    p.add_argument(
        "--doc-types",
        type=_doc_types,
        default=DEFAULT_DOC_TYPES,
        help="comma-separated document types to keep, or 'all' (default: article,note,review)",
    )
    p.add_argument("--prefix-mode", choices=("keep", "strip"), default="keep",
                   help="treat name particles (DE, VAN, ...) as part of the last name, or strip them")
    p.add_argument("--no-fold", dest="fold", action="store_false",
                   help="do not fold diacritics to base letters")
    p.add_argument("--field-map", type=json.loads, default={},
                   help='JSON object renaming columns, e.g. \'{"authors": "AU"}\'')


def _add_synthetic_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-n", "--publications", type=int, default=100_000, help="publications per corpus")
    p.add_argument("-p", "--intent", type=_probability, default=0.0,
                   help="probability of intentional alphabetical ordering")
    p.add_argument("--authors", type=_author_law, default=AuthorCountLaw.uniform(2, 10),
                   help="author count law: '3', '2-10' or '2:0.5,3:0.3,4:0.2' (default 2-10)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="pure")
    p.add_argument("--lead", type=int, default=1, help="lead authors in partial mode")
    p.add_argument("--concentration", type=float, default=None,
                   help="draw p_i ~ Beta with this concentration instead of a constant p")
    p.add_argument("--seed", type=int, default=0)


def _synthetic_config(args, **extra) -> SyntheticConfig:
    return SyntheticConfig(
        publication_count=args.publications,
        intent_probability=args.intent,
        author_count_law=args.authors,
        mode=Mode(args.mode),
        seed=args.seed,
        lead_count=args.lead,
        intent_concentration=args.concentration,
        **extra,
    )


# Output helpers ---------------------------------------------------------


def _pct(x: float) -> str:
    return "" if math.isnan(x) else f"{100 * x:.1f}%"


def _emit(rows: list[list], header: Sequence[str], fmt: str, out, table_rows: list[list] | None = None) -> None:
    """Write ``rows`` as CSV (full precision) or an aligned table."""
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else ("" if v is None else v) for v in row])
        return
    shown = table_rows if table_rows is not None else [[("" if v is None else str(v)) for v in r] for r in rows]
    widths = [len(h) for h in header]
    for row in shown:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    first_left = [True] + [False] * (len(header) - 1)
    def line(cells):
        parts = [c.ljust(w) if left else c.rjust(w) for c, w, left in zip(cells, widths, first_left)]
        return "  ".join(parts).rstrip()
    out.write(line(list(header)) + "\n")
    for row in shown:
        out.write(line(row) + "\n")


GROUP_HEADER = ("group", "weight", "mean_authors", "pct_alphabetical", "pct_intentional",
                "mean_score", "score_minus_intentional")


def _group_label(key: GroupKey) -> str:
    parts = [str(p) for p in key if p is not None]
    return " / ".join(parts) if parts else "all"


def _group_rows(groups: list[tuple[GroupKey, GroupStats]]) -> tuple[list[list], list[list]]:
    rows, table = [], []
    for key, s in groups:
        rows.append([_group_label(key), s.weight, s.mean_authors, s.pct_alphabetical,
                     s.pct_intentional, s.mean_score, s.score_minus_intentional])
        table.append([_group_label(key), f"{s.weight:.1f}", f"{s.mean_authors:.1f}",
                      _pct(s.pct_alphabetical), _pct(s.pct_intentional), _pct(s.mean_score),
                      _pct(s.score_minus_intentional)])
    return rows, table


# Commands ---------------------------------------------------------------


def _analysis_options(args) -> AnalysisOptions:
    reader = options_for(
        args.input,
        doc_types=args.doc_types,
        fold_diacritics=args.fold,
        prefix_mode=args.prefix_mode,
        field_map=args.field_map,
    )
    return AnalysisOptions(reader=reader, years=args.years)


def _workers(args) -> int:
    if getattr(args, "single_threaded", False):
        return 1
    return args.workers if args.workers is not None else default_workers()


def _run_analysis(args):
    result = analyze_file(
        args.input, _analysis_options(args), workers=_workers(args), chunk_size=args.chunk_size
    )
    for err in result.parse.errors:
        log.warning("%s:%d: %s", args.input, err.line, err.message)
    if result.parse.rejected > len(result.parse.errors):
        log.warning("%d more rejected rows not shown", result.parse.rejected - len(result.parse.errors))
    agg = result.aggregate
    population = agg.multi_author_publications if args.multi_author_only else agg.total_publications
    if population == 0:
        raise EmptyCorpusError(
            f"{args.input}: no {'multi-author ' if args.multi_author_only else ''}"
            "publications left after filtering"
        )
    return result


def cmd_analyze(args) -> int:
    result = _run_analysis(args)
    agg = result.aggregate
    overall = agg.overall().finalize()
    categories = apply_thresholds(finalize_all(agg.by_category_pooled()), args.min_weight)
    summary = {
        "input": str(args.input),
        "rows": result.parse.rows,
        "rejected_rows": result.parse.rejected,
        "filtered_doc_type": result.parse.filtered_doc_type,
        "filtered_year": result.filtered_year,
        "total_publications": agg.total_publications,
        "multi_author_publications": agg.multi_author_publications,
        "multi_author_share": agg.multi_author_publications / agg.total_publications,
        "mean_authors": overall.mean_authors,
        "pct_alphabetical": overall.pct_alphabetical,
        "pct_intentional": overall.pct_intentional,
        "mean_score": overall.mean_score,
        "uncategorized_publications": agg.uncategorized,
        "duplicate_author_records": agg.duplicate_author_records,
        "non_latin_records": agg.non_latin_records,
        "categories_reported": len(categories),
        "min_weight": args.min_weight,
    }
    for key, stats in categories.items():
        for w in stats.warnings(args.min_weight):
            log.warning("%s: %s", _group_label(key), w)

    if args.output is not None:
        out = args.output
        out.mkdir(parents=True, exist_ok=True)
        write_aggregates(finalize_all(agg.by_category_year), out / "category_year.csv")
        write_aggregates(categories, out / "categories.csv")
        write_aggregates(finalize_all(agg.by_year), out / "years.csv")
        write_aggregates(finalize_all(agg.by_author_bin), out / "author_bins.csv")
        with open(out / "publication_counts.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("year", "total_publications", "multi_author_publications"))
            for year in sorted(agg.tallies):
                t = agg.tallies[year]
                w.writerow((year, t.total, t.multi_author))
        with open(out / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")

    stdout = sys.stdout
    if args.format == "csv":
        rank_by = "score_minus_intentional" if args.rank_by == "gap" else "pct_intentional"
        rows, _ = _group_rows(rank_groups(categories, rank_by, args.top))
        _emit(rows, GROUP_HEADER, "csv", stdout)
        return 0
    stdout.write(
        f"publications: {agg.total_publications} total, {agg.multi_author_publications} multi-author "
        f"({_pct(summary['multi_author_share'])})\n"
        f"alphabetical: {_pct(overall.pct_alphabetical)}  intentional: {_pct(overall.pct_intentional)}  "
        f"mean score: {_pct(overall.mean_score)}  mean authors: {overall.mean_authors:.2f}\n"
    )
    if categories:
        rank_by = "score_minus_intentional" if args.rank_by == "gap" else "pct_intentional"
        rows, table = _group_rows(rank_groups(categories, rank_by, args.top))
        stdout.write("\n")
        _emit(rows, GROUP_HEADER, "table", stdout, table)
    return 0


_SHARE_STATISTICS = {"pct_alphabetical", "pct_intentional", "mean_score", "score_minus_intentional"}


def cmd_trends(args) -> int:
    if args.aggregates:
        groups = read_aggregates(args.input)
    else:
        result = _run_analysis(args)
        agg = result.aggregate
        groups = finalize_all(agg.by_category_year if args.category else agg.by_year)
    series = trend(groups, args.statistic, category=args.category)
    rows = [[year, value] for year, value in series]
    fmt_value = _pct if args.statistic in _SHARE_STATISTICS else (lambda v: f"{v:.3f}")
    _emit(rows, ("year", args.statistic), args.format, sys.stdout,
          [[str(y), fmt_value(v)] for y, v in series])
    if args.extrapolate:
        crossing = extrapolate_zero_crossing(series) if len(series) >= 2 else None
        if args.format == "csv":
            sys.stdout.write(f"zero_crossing,{'' if crossing is None else repr(crossing)}\n")
        else:
            sys.stdout.write(
                "zero crossing: " + ("none ahead" if crossing is None else f"{crossing:.1f}") + "\n"
            )
    return 0


SCORE_HEADER = ("id", "n", "alphabetical", "adjacent_pairs", "score", "intent_estimate", "ties")


def cmd_score(args) -> int:
    reader = RecordReader(args.input, _analysis_options(args).reader)
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    skipped = 0
    try:
        writer = csv.writer(out, lineterminator="\n") if args.format == "csv" else None
        if writer:
            writer.writerow(SCORE_HEADER)
        else:
            out.write("\t".join(SCORE_HEADER) + "\n")
        for pub in reader:
            if pub.n_authors < 2:
                skipped += 1
                continue
            m = compute_metrics(pub)
            if writer:
                writer.writerow((pub.id, m.n, int(m.alphabetical), m.adjacent_pairs,
                                 repr(m.score), repr(m.intent_estimate), m.ties))
            else:
                out.write(f"{pub.id}\t{m.n}\t{int(m.alphabetical)}\t{m.adjacent_pairs}\t"
                          f"{m.score:.3f}\t{m.intent_estimate:.3f}\t{m.ties}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    for err in reader.errors:
        log.warning("%s:%d: %s", args.input, err.line, err.message)
    if skipped:
        log.info("skipped %d single-author publications", skipped)
    return 0


def cmd_simulate(args) -> int:
    cats = tuple(c.strip() for c in args.categories.split(";") if c.strip())
    config = _synthetic_config(
        args, years=args.years or (2011, 2011), categories=cats,
        second_category_rate=args.second_category_rate,
    )
    fmt = None
    if args.output is None:
        target = sys.stdout
        fmt = "csv"
    else:
        target = args.output
    count = write_records(generate_corpus(config), target, fmt)
    log.info("wrote %d synthetic publications", count)
    return 0


def cmd_validate(args) -> int:
    config = _synthetic_config(args)
    report = validate_estimator(config, args.replications, sigma=args.sigma)
    data = report.to_dict()
    if args.json is not None:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.format == "json":
        json.dump(data, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(report.summary() + "\n")
    if not report.passed:
        raise ValidationFailure(
            f"estimator missed its {args.sigma:g}-sigma tolerance (z = {report.estimator.z:+.2f})"
        )
    return 0


def cmd_curve(args) -> int:
    curve = incidental_curve(args.n_max)
    _emit([[n, q] for n, q in curve], ("n", "incidental_probability"), args.format, sys.stdout,
          [[str(n), f"{q:.3e}"] for n, q in curve])
    return 0


# Parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphauthor",
        description="Measure intentional and incidental alphabetical authorship in bibliographic data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more progress output on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def analysis_args(p):
        _add_reader_args(p)
        p.add_argument("--years", type=_year_range, default=None, help="keep years START-END (inclusive)")
        p.add_argument("--include-single-author", dest="multi_author_only", action="store_false",
                       help="do not fail when only single-author records remain (they never enter the metrics)")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $ALPHAUTHOR_WORKERS or CPU count)")
        p.add_argument("--single-threaded", action="store_true", help="run in-process with one worker")
        p.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE, help=argparse.SUPPRESS)
        p.add_argument("--format", choices=("table", "csv"), default="table")

    p = sub.add_parser("analyze", help="aggregate a record file by category, year and author count")
    analysis_args(p)
    p.add_argument("-o", "--output", type=Path, default=None, help="directory for aggregate files")
    p.add_argument("--min-weight", type=float, default=DEFAULT_MIN_WEIGHT,
                   help="drop categories lighter than this (default 1000)")
    p.add_argument("--rank-by", choices=("intentional", "gap"), default="intentional",
                   help="sort categories by intentional share or by score-minus-intentional gap")
    p.add_argument("--top", type=int, default=None, help="show only the first N categories")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("trends", help="yearly series of one statistic, optionally extrapolated")
    analysis_args(p)
    p.add_argument("--aggregates", action="store_true", help="INPUT is an aggregate file, not records")
    p.add_argument("--statistic", choices=STATISTICS + ("score_minus_intentional",), default="pct_intentional")
    p.add_argument("--category", default=None, help="restrict to one subject category")
    p.add_argument("--extrapolate", action="store_true", help="report where a fitted line reaches zero")
    p.set_defaults(func=cmd_trends)

    p = sub.add_parser("score", help="per-publication metrics dump")
    _add_reader_args(p)
    p.add_argument("-o", "--output", type=Path, default=None)
    p.add_argument("--format", choices=("table", "csv"), default="csv")
    p.set_defaults(func=cmd_score, years=None)

    p = sub.add_parser("simulate", help="write a synthetic record file")
    _add_synthetic_args(p)
    p.add_argument("-o", "--output", type=Path, default=None, help="record file (default: stdout as CSV)")
    p.add_argument("--years", type=_year_range, default=None, help="publication years START-END")
    p.add_argument("--categories", default="Synthetic", help="';'-separated category labels")
    p.add_argument("--second-category-rate", type=_probability, default=0.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="Monte Carlo check of the intent estimator")
    _add_synthetic_args(p)
    p.add_argument("-r", "--replications", type=int, default=50)
    p.add_argument("--sigma", type=float, default=3.0, help="tolerance in standard errors")
    p.add_argument("--json", type=Path, default=None, help="also write the report as JSON")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("curve", help="incidental-ordering probability 1/n! by author count")
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except AlphauthorError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
