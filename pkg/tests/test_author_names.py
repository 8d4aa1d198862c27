import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphauthor.author_names import (
    CanonicalName,
    Ordering,
    RawName,
    canonicalize,
    compare,
    has_non_latin,
    make_canonicalizer,
)
from alphauthor.errors import InvalidNameError


def reference_compare(a: CanonicalName, b: CanonicalName) -> Ordering:
    """Rule-by-rule comparator, written without tuple or string ordering."""

    def chars(x: str, y: str) -> int:
        for cx, cy in zip(x, y):
            if ord(cx) != ord(cy):
                return -1 if ord(cx) < ord(cy) else 1
        # Equal up to the shorter length: the shorter one comes first.
        if len(x) != len(y):
            return -1 if len(x) < len(y) else 1
        return 0

    c = chars(a.key_last, b.key_last)
    if c == 0:
        c = chars(a.key_initials, b.key_initials)
    return Ordering(c)


class TestCanonicalize:
    def test_space_removed(self):
        assert canonicalize(RawName("VAN RAAN", "A")).key_last == "VANRAAN"

    def test_apostrophe_removed(self):
        assert canonicalize(("O'Brien", "K")).key_last == "OBRIEN"

    def test_identity_case(self):
        assert canonicalize(("WILLIAMS", "J")) == CanonicalName("WILLIAMS", "J")

    @pytest.mark.parametrize("raw", ["VAN RAAN", "VANRAAN", "VAN-RAAN", "van raan", " Van  Raan ", "Van’Raan"])
    def test_separator_insensitive(self, raw):
        assert canonicalize((raw, "")).key_last == "VANRAAN"

    def test_initials_cleaned(self):
        assert canonicalize(("Smith", "j.-a.")).key_initials == "JA"

    def test_diacritics_folded(self):
        assert canonicalize(("Élodie-Müller", "É")) == CanonicalName("ELODIEMULLER", "E")
        assert canonicalize(("Ørsted", "")).key_last == "ORSTED"
        assert canonicalize(("Łukasiewicz", "J")).key_last == "LUKASIEWICZ"

    def test_folding_can_be_disabled(self):
        assert canonicalize(("Émile", ""), fold_diacritics=False).key_last == "ÉMILE"

    def test_prefix_strip_mode(self):
        assert canonicalize(("VAN RAAN", "A"), prefix_mode="strip").key_last == "RAAN"
        assert canonicalize(("de la Cruz", ""), prefix_mode="strip").key_last == "CRUZ"
        assert canonicalize(("D'Alembert", ""), prefix_mode="strip").key_last == "ALEMBERT"
        # A lone particle is a last name in its own right.
        assert canonicalize(("VAN", ""), prefix_mode="strip").key_last == "VAN"
        # Particles only count as such when separated.
        assert canonicalize(("VANDERBILT", ""), prefix_mode="strip").key_last == "VANDERBILT"

    def test_keep_mode_is_default(self):
        assert canonicalize(("DE GROOT", "")).key_last == "DEGROOT"

    def test_unknown_prefix_mode(self):
        with pytest.raises(ValueError):
            canonicalize(("X", ""), prefix_mode="drop")

    @pytest.mark.parametrize("raw", ["", "   ", "-", "' -"])
    def test_empty_last_name_rejected(self, raw):
        with pytest.raises(InvalidNameError):
            canonicalize((raw, "A"))

    def test_non_latin_flag(self):
        assert has_non_latin(canonicalize(("Παπαδόπουλος", "")))
        assert not has_non_latin(canonicalize(("Müller", "")))

    def test_bulk_canonicalizer_agrees(self):
        canon = make_canonicalizer(prefix_mode="strip")
        assert canon("van der Berg", "p") == canonicalize(("van der Berg", "p"), prefix_mode="strip")


class TestCompare:
    def test_prefix_sorts_first(self):
        assert compare(CanonicalName("WILLIAMS", "J"), CanonicalName("WILLIAMSON", "A")) is Ordering.BEFORE
        assert compare(CanonicalName("WILLIAMSON"), CanonicalName("WILLIAMS")) is Ordering.AFTER

    def test_initials_break_ties(self):
        assert compare(CanonicalName("SMITH", "A"), CanonicalName("SMITH", "J")) is Ordering.BEFORE

    def test_empty_initials_first(self):
        assert compare(CanonicalName("SMITH", ""), CanonicalName("SMITH", "A")) is Ordering.BEFORE

    def test_equal(self):
        assert compare(CanonicalName("JONES", "B"), CanonicalName("JONES", "B")) is Ordering.EQUAL

    def test_last_name_dominates_initials(self):
        assert compare(CanonicalName("ABEL", "Z"), CanonicalName("ABELS", "A")) is Ordering.BEFORE


raw_last = st.text(
    alphabet=st.sampled_from(list("ABCDEFGHIJKLMNOPQRSTUVWXYZabcxyzÉéüØ '-")), min_size=1, max_size=10
).filter(lambda s: any(c.isalpha() for c in s))
raw_initials = st.text(alphabet=st.sampled_from(list("ABCJKZabc.- ")), max_size=3)
canonical = st.builds(
    CanonicalName,
    st.text(alphabet="ABCDEFGHIJ", min_size=1, max_size=5),
    st.text(alphabet="ABC", max_size=2),
)


@given(raw_last, raw_initials)
def test_idempotent(last, initials):
    once = canonicalize((last, initials))
    assert canonicalize((once.key_last, once.key_initials)) == once
    assert not set(" '-") & set(once.key_last)


@given(raw_last, raw_initials)
def test_idempotent_strip_mode(last, initials):
    once = canonicalize((last, initials), prefix_mode="strip")
    assert canonicalize(tuple(once), prefix_mode="strip") == once


@given(canonical, canonical)
def test_antisymmetric_and_matches_reference(a, b):
    ab, ba = compare(a, b), compare(b, a)
    assert ab == -ba
    assert ab == reference_compare(a, b)


@settings(max_examples=300)
@given(canonical, canonical, canonical)
def test_transitive(a, b, c):
    if compare(a, b) <= 0 and compare(b, c) <= 0:
        assert compare(a, c) <= 0
