"""Author-name canonicalization and the alphabetical-order relation.

Names are reduced to an uppercase last-name key with spaces, apostrophes
and hyphens removed, plus an uppercase initials key.  The order relation
compares last-name keys first (a strict prefix sorts before its
extension, so WILLIAMS precedes WILLIAMSON) and breaks exact ties on the
initials.  Because both keys are plain strings, that relation is exactly
Python's tuple ordering of ``(key_last, key_initials)``.
"""

from __future__ import annotations

import enum
import functools
import re
import unicodedata
from collections.abc import Callable
from typing import NamedTuple

from .errors import InvalidNameError

__all__ = [
    "CanonicalName",
    "NAME_PREFIXES",
    "Ordering",
    "RawName",
    "canonicalize",
    "compare",
    "has_non_latin",
    "make_canonicalizer",
]

PREFIX_MODES = ("keep", "strip")

# Characters the ordering ignores.  Typographic apostrophes and the
# Unicode hyphen family are included so that mixed-source data agrees.
_SEPARATORS = " \t'’‘ʼ`-‐‑‒–­"
_SEPARATOR_TABLE = str.maketrans("", "", _SEPARATORS)
_SEPARATOR_RE = re.compile("[" + re.escape(_SEPARATORS) + "]+")

# Letters that NFKD does not decompose into a base letter.
_FOLD_TABLE = str.maketrans(
    {
        "Ø": "O",
        "ø": "o",
        "Æ": "AE",
        "æ": "ae",
        "Œ": "OE",
        "œ": "oe",
        "Ł": "L",
        "ł": "l",
        "Đ": "D",
        "đ": "d",
        "Ð": "D",
        "ð": "d",
        "Þ": "TH",
        "þ": "th",
        "ı": "i",
        "ß": "ss",
    }
)

#: Particles removed by ``prefix_mode="strip"`` when they are followed by
#: a separator, e.g. ``VAN RAAN`` -> ``RAAN`` and ``D'ALEMBERT`` -> ``ALEMBERT``.
NAME_PREFIXES = frozenset(
    {
        "A", "AL", "AP", "AUF", "D", "DA", "DAL", "DAS", "DE", "DEL",
        "DELA", "DELLA", "DEN", "DER", "DES", "DI", "DO", "DOS", "DU",
        "EL", "IM", "L", "LA", "LE", "LO", "OF", "TEN", "TER", "UND",
        "VAN", "VANDE", "VANDEN", "VANDER", "VOM", "VON", "ZU", "ZUM",
        "ZUR",
    }
)


class Ordering(enum.IntEnum):
    BEFORE = -1
    EQUAL = 0
    AFTER = 1


class RawName(NamedTuple):
    """An author name as ingested: last name plus (possibly empty) initials."""

    last: str
    initials: str = ""


class CanonicalName(NamedTuple):
    """A comparison-ready author name.

    Instances compare with ``<``/``==`` exactly as :func:`compare` does.
    """

    key_last: str
    key_initials: str = ""

    def __str__(self) -> str:
        if self.key_initials:
            return f"{self.key_last}, {self.key_initials}"
        return self.key_last


# NamedTuple.__new__ is a Python-level function; this skips it.
_new_name = tuple.__new__


def _fold(text: str) -> str:
    text = text.translate(_FOLD_TABLE)
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(c for c in decomposed if not unicodedata.combining(c))


def _strip_prefixes(last: str) -> str:
    parts = _SEPARATOR_RE.split(last.strip())
    parts = [p for p in parts if p]
    while len(parts) > 1 and parts[0] in NAME_PREFIXES:
        parts.pop(0)
    return "".join(parts)


@functools.lru_cache(maxsize=1 << 16)
def _canonicalize(last: str, initials: str, fold: bool, prefix_mode: str) -> CanonicalName:
    if fold and not (last.isascii() and initials.isascii()):
        last = _fold(last)
        initials = _fold(initials)
    last = last.upper()
    if prefix_mode == "strip":
        key_last = _strip_prefixes(last)
    else:
        key_last = last.strip().translate(_SEPARATOR_TABLE)
    if not key_last:
        raise InvalidNameError(f"empty last name after canonicalization: {last!r}")
    initials = initials.upper()
    if not initials.isalpha():
        initials = "".join(c for c in initials if c.isalpha())
    return _new_name(CanonicalName, (key_last, initials))


def canonicalize(
    raw: RawName | tuple[str, str],
    *,
    fold_diacritics: bool = True,
    prefix_mode: str = "keep",
) -> CanonicalName:
    """Canonicalize a raw author name.

    Args:
        raw: ``RawName`` or a ``(last, initials)`` pair.
        fold_diacritics: Map accented letters to their base letter
            (``É`` -> ``E``) before comparison.
        prefix_mode: ``"keep"`` treats particles such as DE, DI or VAN as
            part of the last name; ``"strip"`` drops leading particles.

    Returns:
        The canonical name.

    Raises:
        InvalidNameError: If nothing is left of the last name.
    """
    if prefix_mode not in PREFIX_MODES:
        raise ValueError(f"prefix_mode must be one of {PREFIX_MODES}, got {prefix_mode!r}")
    last, initials = raw
    return _canonicalize(last, initials or "", fold_diacritics, prefix_mode)


def make_canonicalizer(
    *, fold_diacritics: bool = True, prefix_mode: str = "keep"
) -> Callable[[str, str], CanonicalName]:
    """A ``(last, initials) -> CanonicalName`` function with fixed options.

    Same result as :func:`canonicalize`, minus the per-call option checks;
    meant for bulk ingestion.
    """
    if prefix_mode not in PREFIX_MODES:
        raise ValueError(f"prefix_mode must be one of {PREFIX_MODES}, got {prefix_mode!r}")

    def canon(last: str, initials: str = "") -> CanonicalName:
        return _canonicalize(last, initials, fold_diacritics, prefix_mode)

    return canon


def compare(a: CanonicalName, b: CanonicalName) -> Ordering:
    """Order two canonical names: last-name key first, then initials."""
    ka = (a.key_last, a.key_initials)
    kb = (b.key_last, b.key_initials)
    if ka < kb:
        return Ordering.BEFORE
    if ka > kb:
        return Ordering.AFTER
    return Ordering.EQUAL


def has_non_latin(name: CanonicalName) -> bool:
    """True if the name still carries letters outside ASCII after folding."""
    return not (name.key_last.isascii() and name.key_initials.isascii())
