import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphauthor.aggregation import GroupKey, GroupStats
from alphauthor.author_names import CanonicalName, RawName
from alphauthor.errors import FormatError
from alphauthor.ingest import (
    AGGREGATE_COLUMNS,
    ReaderOptions,
    aggregates_to_string,
    options_for,
    parse_authors,
    parse_categories,
    read_aggregates,
    read_records,
    write_aggregates,
    write_records,
)
from alphauthor.order_metrics import DocType, compute_metrics
from alphauthor.synthetic import AuthorCountLaw, SyntheticConfig, generate_corpus

HEADER = "id,year,doc_type,authors,categories\n"


def read_text(text, **kw):
    reader = read_records(io.StringIO(text), ReaderOptions(**kw))
    return list(reader), reader


class TestAuthorField:
    def test_comma_form(self):
        assert parse_authors("VAN RAAN, A; Smith, J.A.") == [RawName("VAN RAAN", "A"), RawName("Smith", "J.A.")]

    def test_space_form(self):
        assert parse_authors("JONES B; SMITH A") == [RawName("JONES", "B"), RawName("SMITH", "A")]

    def test_bare_last_name(self):
        assert parse_authors("Wang") == [RawName("Wang", "")]

    def test_empty(self):
        assert parse_authors(" ; ") == []


class TestCategoryField:
    def test_equal_split(self):
        assert parse_categories("Math; Econ") == (("Math", 0.5), ("Econ", 0.5))

    def test_weights(self):
        assert parse_categories("Math=0.25; Econ=0.75") == (("Math", 0.25), ("Econ", 0.75))

    def test_bad_weights_rejected(self):
        pubs, reader = read_text(HEADER + "P1,2011,article,A X; B Y,Math=0.7; Econ=0.7\n")
        assert pubs == [] and reader.stats.rejected == 1
        with pytest.raises(ValueError):
            parse_categories("Math=0.5; Econ")


class TestReadRecords:
    def test_two_authors(self):
        pubs, reader = read_text(HEADER + "P1,2011,article,JONES B; SMITH A,Mathematics\n")
        assert len(pubs) == 1 and pubs[0].n_authors == 2
        assert pubs[0].authors == (CanonicalName("JONES", "B"), CanonicalName("SMITH", "A"))
        assert pubs[0].categories == (("Mathematics", 1.0),)
        assert not reader.errors

    def test_two_categories_split(self):
        pubs, _ = read_text(HEADER + "P1,2011,article,\"A, X; B, Y\",Mathematics;Economics\n")
        assert pubs[0].categories == (("Mathematics", 0.5), ("Economics", 0.5))

    def test_zero_authors_rejected_and_processing_continues(self):
        text = HEADER + "P1,2011,article,,Mathematics\nP2,2011,article,A X; B Y,Mathematics\n"
        pubs, reader = read_text(text)
        assert [p.id for p in pubs] == ["P2"]
        assert reader.errors[0].line == 2 and "no authors" in reader.errors[0].message
        assert reader.stats.rejected == 1

    def test_malformed_rows_diagnosed(self):
        text = HEADER + "P1,20x1,article,A X,M\nP2,2011,article\nP3,2011,article,'-,M\n"
        pubs, reader = read_text(text)
        assert pubs == []
        assert [e.line for e in reader.errors] == [2, 3, 4]

    def test_doc_type_filter(self):
        rows = "".join(f"P{i},2011,{t},A X; B Y,M\n" for i, t in enumerate(["article", "note", "review", "letter", "editorial"]))
        pubs, reader = read_text(HEADER + rows)
        assert [p.doc_type for p in pubs] == [DocType.ARTICLE, DocType.NOTE, DocType.REVIEW]
        assert reader.stats.filtered_doc_type == 2
        everything, _ = read_text(HEADER + rows, doc_types=None)
        assert len(everything) == 5

    def test_missing_doc_type_means_article(self):
        pubs, _ = read_text("id,year,authors\nP1,2011,A X; B Y\n")
        assert pubs[0].doc_type is DocType.ARTICLE and pubs[0].categories == ()

    def test_bom_tolerated(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("﻿" + HEADER + "P1,2011,article,A X; B Y,M\n", encoding="utf-8")
        assert len(list(read_records(path))) == 1

    def test_missing_column(self):
        with pytest.raises(FormatError, match="authors"):
            read_text("id,year\nP1,2011\n")

    def test_field_map(self):
        text = "key,py,au\nP1,2011,A X; B Y\n"
        pubs, _ = read_text(text, field_map={"id": "key", "year": "py", "authors": "au"})
        assert pubs[0].id == "P1" and pubs[0].year == 2011

    def test_tsv_and_jsonl_by_extension(self, tmp_path):
        assert options_for(tmp_path / "x.tsv").delimiter == "\t"
        assert options_for(tmp_path / "x.jsonl").format == "jsonl"

    def test_jsonl_variants(self):
        lines = [
            {"id": "J1", "year": 2011, "authors": [["Jones", "B"], ["Smith", "A"]], "categories": ["M", "E"]},
            {"id": "J2", "year": 2010, "authors": [{"last": "van Raan", "initials": "A"}, "Wang, L"],
             "categories": {"M": 0.25, "E": 0.75}},
            {"id": "J3", "year": 2010, "authors": []},
        ]
        text = "\n".join(json.dumps(x) for x in lines) + "\nnot json\n"
        pubs, reader = read_text(text, format="jsonl")
        assert [p.id for p in pubs] == ["J1", "J2"]
        assert pubs[0].categories == (("M", 0.5), ("E", 0.5))
        assert pubs[1].authors[0] == CanonicalName("VANRAAN", "A")
        assert [e.line for e in reader.errors] == [3, 4]

    def test_prefix_mode_option(self):
        pubs, _ = read_text(HEADER + "P1,2011,article,VAN RAAN A; SMITH J,M\n", prefix_mode="strip")
        assert pubs[0].authors[0].key_last == "RAAN"

    def test_diagnostics_capped(self):
        text = HEADER + "bad\n" * 50
        _, reader = read_text(text, max_diagnostics=5)
        assert len(reader.errors) == 5 and reader.stats.rejected == 50


class TestRoundTrip:
    @pytest.mark.parametrize("suffix", [".csv", ".tsv", ".jsonl"])
    def test_synthetic_records(self, tmp_path, suffix):
        config = SyntheticConfig(2000, 0.3, AuthorCountLaw.uniform(2, 8), seed=1,
                                 categories=("A", "B", "C"), second_category_rate=0.4)
        pubs = list(generate_corpus(config))
        path = tmp_path / f"records{suffix}"
        assert write_records(pubs, path) == len(pubs)
        back = list(read_records(path))
        assert back == pubs
        assert [compute_metrics(p) for p in back] == [compute_metrics(p) for p in pubs]

    def test_uneven_weights_survive(self, tmp_path):
        from alphauthor.order_metrics import Publication

        pub = Publication("x", 2011, (CanonicalName("A"), CanonicalName("B")), categories=(("M", 0.1), ("E", 0.9)))
        path = tmp_path / "r.csv"
        write_records([pub], path)
        assert list(read_records(path)) == [pub]


finite = st.floats(-1, 1, allow_nan=False)
group_stats = st.builds(
    GroupStats,
    st.floats(0, 1e7, allow_nan=False),
    st.floats(2, 500, allow_nan=False),
    st.floats(0, 1, allow_nan=False),
    finite,
    finite,
    st.integers(0, 10**7),
)
group_keys = st.builds(
    GroupKey,
    st.one_of(st.none(), st.text(alphabet="ABCDEFGH ,&\"'", min_size=1, max_size=12).filter(lambda s: s.strip() == s and s)),
    st.one_of(st.none(), st.integers(1900, 2100), st.just("2007-2011")),
    st.one_of(st.none(), st.integers(2, 50), st.just("over-50")),
).filter(lambda k: any(v is not None for v in k))


class TestAggregates:
    @settings(max_examples=100)
    @given(st.dictionaries(group_keys, group_stats, max_size=8))
    def test_round_trip(self, groups):
        back = read_aggregates(io.StringIO(aggregates_to_string(groups)))
        assert back == groups

    def test_empty_is_header_only(self):
        assert aggregates_to_string({}) == ",".join(AGGREGATE_COLUMNS) + "\n"
        assert read_aggregates(io.StringIO(aggregates_to_string({}))) == {}

    def test_published_table_row(self):
        text = (
            "category,year,mean_authors,pct_alphabetical,pct_intentional,mean_score\n"
            "Mathematics,2007-2011,2.4,83.3%,73.3%,73.7%\n"
        )
        groups = read_aggregates(io.StringIO(text))
        s = groups[GroupKey("Mathematics", "2007-2011")]
        assert s.mean_authors == 2.4
        assert s.pct_alphabetical == pytest.approx(0.833, abs=1e-15)
        assert s.pct_intentional == pytest.approx(0.733, abs=1e-15)
        assert s.mean_score == pytest.approx(0.737, abs=1e-15)
        assert math.isnan(s.weight)

    def test_missing_column_named(self):
        text = "category,year,mean_authors,pct_alphabetical,mean_score\nM,2011,2,0.5,0.1\n"
        with pytest.raises(FormatError, match="pct_intentional"):
            read_aggregates(io.StringIO(text))

    def test_bad_value_named(self):
        text = "category,year,mean_authors,pct_alphabetical,pct_intentional,mean_score\nM,2011,2,abc,0.1,0.1\n"
        with pytest.raises(FormatError, match="pct_alphabetical"):
            read_aggregates(io.StringIO(text))

    def test_duplicate_key(self):
        row = "M,2011,2,0.5,0.1,0.1\n"
        text = "category,year,mean_authors,pct_alphabetical,pct_intentional,mean_score\n" + row * 2
        with pytest.raises(FormatError, match="duplicate"):
            read_aggregates(io.StringIO(text))

    def test_field_map(self):
        text = "Field,Period,MeanAu,Alpha,Intent,Score\nMathematics,2007-2011,2.4,0.833,0.733,0.737\n"
        fm = {"category": "Field", "year": "Period", "mean_authors": "MeanAu",
              "pct_alphabetical": "Alpha", "pct_intentional": "Intent", "mean_score": "Score"}
        assert GroupKey("Mathematics", "2007-2011") in read_aggregates(io.StringIO(text), fm)

    def test_file_round_trip(self, tmp_path):
        groups = {GroupKey("M", 2011): GroupStats(1000.5, 2.5, 0.4, 0.3, 0.31, 1001)}
        write_aggregates(groups, tmp_path / "a.csv")
        assert read_aggregates(tmp_path / "a.csv") == groups
