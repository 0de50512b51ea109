"""Table-driven romanization of Indic scripts and transliterated pair generation."""

from __future__ import annotations

import unicodedata
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import regex

from .corpus import (DocumentRecord, LanguageTag, PairKind, ParallelPair, Source, SourceKind,
                     is_latin_only)

CLASSES = ("consonant", "vowel_sign", "virama", "nukta", "other")

# Script used to write each language. ks/sa/sd are excluded from pair
# generation by default even where a table for their script exists.
LANGUAGE_SCRIPTS = {
    "as": "Bengali", "bn": "Bengali", "gu": "Gujarati", "hi": "Devanagari",
    "kn": "Kannada", "ks": "Arabic", "ml": "Malayalam", "mr": "Devanagari",
    "ne": "Devanagari", "or": "Oriya", "pa": "Gurmukhi", "sa": "Devanagari",
    "sd": "Arabic", "ta": "Tamil", "te": "Telugu", "ur": "Arabic",
}
DEFAULT_EXCLUDED = frozenset({"ks", "sa", "sd"})
MAX_KEY_LEN = 3


class TableError(ValueError):
    pass


@lru_cache(maxsize=None)
def script_pattern(script: str) -> regex.Pattern:
    try:
        return regex.compile(rf"\p{{Script={script}}}")
    except regex.error as exc:
        raise TableError(f"unknown script {script!r}") from exc


@lru_cache(maxsize=None)
def script_code_points(script: str) -> frozenset[str]:
    pat = script_pattern(script)
    return frozenset(chr(c) for c in range(0x110000)
                     if not 0xD800 <= c <= 0xDFFF and pat.match(chr(c)))


def _is_ascii_alnum(s: str) -> bool:
    return s.isascii() and s.isalnum()


@dataclass(frozen=True)
class RomanizationTable:
    script: str
    implicit_vowel: str
    entries: Mapping[str, tuple[str, str]]  # native -> (class, latin)

    def __post_init__(self):
        pat = script_pattern(self.script)
        if not _is_ascii_alnum(self.implicit_vowel):
            raise TableError(f"implicit vowel must be ASCII letters, got {self.implicit_vowel!r}")
        for key, (cls, latin) in self.entries.items():
            if not 1 <= len(key) <= MAX_KEY_LEN:
                raise TableError(f"key {key!r} must hold 1-{MAX_KEY_LEN} code points")
            if not all(pat.match(ch) for ch in key):
                raise TableError(f"key {key!r} has code points outside {self.script}")
            if cls not in CLASSES:
                raise TableError(f"unknown class {cls!r} for {key!r}")
            # Punctuation must stay punctuation so word boundaries survive.
            if len(key) == 1 and unicodedata.category(key).startswith("P"):
                if not (len(latin) == 1 and latin.isascii() and unicodedata.category(latin).startswith("P")):
                    raise TableError(f"punctuation {key!r} must map to one ASCII punctuation mark")
            elif not _is_ascii_alnum(latin):
                raise TableError(f"value for {key!r} must be non-empty ASCII letters/digits, got {latin!r}")
        missing = sorted(ch for ch in script_code_points(self.script) if ch not in self.entries)
        if missing:
            shown = " ".join(f"U+{ord(c):04X}" for c in missing[:8])
            raise TableError(f"{self.script} table misses {len(missing)} code points: {shown}")

    @classmethod
    def parse(cls, text: str, name: str = "<table>") -> RomanizationTable:
        script = None
        implicit = "a"
        current = "other"
        entries: dict[str, tuple[str, str]] = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("##"):
                continue
            if line.startswith("#"):
                directive, _, arg = line[1:].partition(" ")
                arg = arg.strip()
                if directive == "script":
                    script = arg
                elif directive == "implicit_vowel":
                    implicit = arg
                elif directive == "class":
                    current = arg
                else:
                    raise TableError(f"{name}:{n}: unknown directive #{directive}")
                continue
            cols = line.split("\t")
            if len(cols) > 2 and cols[2].startswith("##"):
                cols = cols[:2]
            if len(cols) != 2:
                raise TableError(f"{name}:{n}: expected native<TAB>latin")
            key = cols[0]
            if len(key) > 1 and unicodedata.normalize("NFC", key) != key:
                raise TableError(f"{name}:{n}: multi-code-point key {key!r} is not NFC and can never match")
            if key in entries:
                raise TableError(f"{name}:{n}: duplicate key {cols[0]!r}")
            entries[key] = (current, cols[1].strip())
        if script is None:
            raise TableError(f"{name}: missing #script directive")
        return cls(script, implicit, entries)

    @classmethod
    def load(cls, path) -> RomanizationTable:
        path = Path(path)
        return cls.parse(path.read_text(encoding="utf-8"), str(path))


def bundled_tables() -> dict[str, RomanizationTable]:
    """Tables shipped with the package, keyed by script name."""
    out = {}
    for res in sorted(resources.files("corpusforge").joinpath("tables").iterdir(), key=lambda r: r.name):
        if res.name.endswith(".tsv"):
            table = RomanizationTable.parse(res.read_text(encoding="utf-8"), res.name)
            out[table.script] = table
    return out


def romanize(text: str, table: RomanizationTable) -> str:
    """Longest-match romanization with implicit-vowel insertion.

    A consonant leaves the implicit vowel pending; a following vowel sign
    replaces it, a virama drops it and a nukta leaves it untouched.
    Anything outside the table passes through.
    """
    text = unicodedata.normalize("NFC", text)
    entries = table.entries
    out = []
    pending = False
    i, n = 0, len(text)
    while i < n:
        for size in range(min(MAX_KEY_LEN, n - i), 0, -1):
            hit = entries.get(text[i:i + size])
            if hit is not None:
                break
        else:
            if pending:
                out.append(table.implicit_vowel)
                pending = False
            out.append(text[i])
            i += 1
            continue
        cls, latin = hit
        if cls == "consonant":
            if pending:
                out.append(table.implicit_vowel)
            out.append(latin)
            pending = True
        elif cls == "vowel_sign":
            out.append(latin)
            pending = False
        elif cls == "virama":
            if not pending:
                out.append(latin)
            pending = False
        elif cls == "nukta":
            if not pending:
                out.append(latin)
        else:
            if pending:
                out.append(table.implicit_vowel)
                pending = False
            out.append(latin)
        i += size
    if pending:
        out.append(table.implicit_vowel)
    return unicodedata.normalize("NFC", "".join(out))


def make_translit_pairs(docs: Iterable[DocumentRecord], tables: Mapping[str, RomanizationTable],
                        skipped: Counter | None = None,
                        excluded: Iterable[str] = DEFAULT_EXCLUDED) -> Iterator[ParallelPair]:
    """One transliterated pair per document whose language has a usable table.

    Documents of excluded languages, of English, or of a script without a
    table are counted in ``skipped`` under their language code. Documents
    whose romanization still holds letters of another script are counted
    under ``"<code>:mixed"``.
    """
    excluded = frozenset(excluded)
    if skipped is None:
        skipped = Counter()
    for doc in docs:
        code = doc.lang.code
        table = tables.get(LANGUAGE_SCRIPTS.get(code, ""))
        if doc.lang.transliterated or code in excluded or table is None:
            skipped[code] += 1
            continue
        latin = romanize(doc.text, table)
        if not is_latin_only(latin):
            skipped[f"{code}:mixed"] += 1
            continue
        tgt = DocumentRecord(doc.id, doc.lang.as_transliterated(),
                             SourceKind(Source.PARALLEL_TRANSLITERATION, doc.source.label), latin)
        yield ParallelPair(doc, tgt, PairKind.TRANSLITERATED)


def language_table(lang: LanguageTag, tables: Mapping[str, RomanizationTable]) -> RomanizationTable:
    try:
        return tables[LANGUAGE_SCRIPTS[lang.code]]
    except KeyError:
        raise TableError(f"no romanization table for {lang}") from None
