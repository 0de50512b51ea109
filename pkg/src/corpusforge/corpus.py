"""Corpus data model, ingestion and per-language token accounting."""

from __future__ import annotations

import csv
import enum
import io
import logging
import os
import re
import struct
import unicodedata
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

import regex

log = logging.getLogger(__name__)

# Order fixes the 1-byte language index of the shard and record formats.
LANGUAGES = (
    "as", "bn", "en", "gu", "hi", "kn", "ks", "ml", "mr",
    "ne", "or", "pa", "sa", "sd", "ta", "te", "ur",
)
_LANG_INDEX = {code: i for i, code in enumerate(LANGUAGES)}


class CorpusError(ValueError):
    pass


class IngestError(CorpusError):
    def __init__(self, path, line_no, reason):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no


@dataclass(frozen=True, order=True)
class LanguageTag:
    code: str
    transliterated: bool = False

    def __post_init__(self):
        if self.code not in _LANG_INDEX:
            raise CorpusError(f"unsupported language code {self.code!r}")
        if self.transliterated and self.code == "en":
            raise CorpusError("en has no transliterated variant")

    @classmethod
    def parse(cls, text: str) -> LanguageTag:
        code, sep, suffix = text.strip().partition("-")
        if sep and suffix != "tr":
            raise CorpusError(f"bad language tag {text!r}")
        return cls(code, bool(sep))

    @property
    def index(self) -> int:
        return _LANG_INDEX[self.code]

    def native(self) -> LanguageTag:
        return LanguageTag(self.code)

    def as_transliterated(self) -> LanguageTag:
        return LanguageTag(self.code, True)

    def __str__(self):
        return f"{self.code}-tr" if self.transliterated else self.code


class Source(enum.IntEnum):
    WIKIPEDIA = 0
    CRAWL = 1
    PARALLEL_TRANSLATION = 2
    PARALLEL_TRANSLITERATION = 3

    @property
    def is_parallel(self) -> bool:
        return self >= Source.PARALLEL_TRANSLATION

    @classmethod
    def parse(cls, text: str) -> Source:
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise CorpusError(f"unknown source kind {text!r}") from None

    def __str__(self):
        return self.name.lower()


@dataclass(frozen=True)
class SourceKind:
    kind: Source
    label: str = field(default="", compare=False)

    @classmethod
    def of(cls, value: SourceKind | Source | str, label: str = "") -> SourceKind:
        if isinstance(value, SourceKind):
            return value
        if isinstance(value, str):
            value = Source.parse(value)
        return cls(value, label)

    def __str__(self):
        return str(self.kind)


def normalize(text: str) -> str:
    """NFC plus outer whitespace trim. Never changes case or drops marks."""
    return unicodedata.normalize("NFC", text).strip()


def make_doc_id(shard: int, line: int) -> int:
    if not (0 <= shard < 2**32 and 0 <= line < 2**32):
        raise CorpusError(f"doc id out of range: shard={shard} line={line}")
    return (shard << 32) | line


def split_doc_id(doc_id: int) -> tuple[int, int]:
    return doc_id >> 32, doc_id & 0xFFFFFFFF


@dataclass(frozen=True)
class DocumentRecord:
    id: int
    lang: LanguageTag
    source: SourceKind
    text: str

    def __post_init__(self):
        if not self.text or self.text != normalize(self.text):
            raise CorpusError(f"document {self.id} text is empty or not normalized")


class PairKind(enum.IntEnum):
    NONE = 0
    TRANSLATED = 1
    TRANSLITERATED = 2

    def __str__(self):
        return self.name.lower()


_NON_LATIN_LETTER = regex.compile(r"[\p{L}--\p{Script=Latin}]", regex.V1)


def is_latin_only(text: str) -> bool:
    """True when every letter in ``text`` is Latin script."""
    return _NON_LATIN_LETTER.search(text) is None


@dataclass(frozen=True)
class ParallelPair:
    src: DocumentRecord
    tgt: DocumentRecord
    kind: PairKind

    def __post_init__(self):
        if self.kind is PairKind.TRANSLATED:
            if self.tgt.lang.code != "en":
                raise CorpusError("translated pair target must be English")
        elif self.kind is PairKind.TRANSLITERATED:
            if self.tgt.lang != self.src.lang.as_transliterated():
                raise CorpusError("transliterated pair target must carry the -tr tag of its source")
            if not is_latin_only(self.tgt.text):
                raise CorpusError("transliterated target contains non-Latin letters")
        else:
            raise CorpusError("pair kind must be translated or transliterated")


# --- ingestion -------------------------------------------------------------

_FILENAME = re.compile(r"^(?P<lang>[a-z]{2}(?:-tr)?)\.(?P<source>[a-z_]+)\.(?:txt|tsv|shard)$")


def parse_corpus_filename(path) -> tuple[LanguageTag, SourceKind]:
    """``hi-tr.wikipedia.txt`` -> (hi-tr, wikipedia)."""
    m = _FILENAME.match(Path(path).name)
    if not m:
        raise CorpusError(f"file name {Path(path).name!r} does not match <lang>[-tr].<source>.txt")
    return LanguageTag.parse(m["lang"]), SourceKind.of(m["source"])


def _decoded_lines(path, on_error: str) -> Iterator[tuple[int, str]]:
    if on_error not in ("skip", "abort"):
        raise ValueError(f"on_error must be 'skip' or 'abort', got {on_error!r}")
    with open(path, "rb") as fh:
        for line_no, raw in enumerate(fh):
            try:
                yield line_no, raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                if on_error == "abort":
                    raise IngestError(path, line_no + 1, f"invalid UTF-8 ({exc.reason})") from exc
                log.warning("%s:%d: skipping line with invalid UTF-8", path, line_no + 1)


def ingest(path, lang: LanguageTag | None = None, source=None, *, shard: int = 0,
           on_error: str = "abort") -> Iterator[DocumentRecord]:
    """Yield normalized documents from a plain or sharded corpus file.

    Plain files hold one document per line; blank lines are dropped but still
    advance the line index, so ids stay tied to physical lines. Files ending
    in ``.shard`` use the length-prefixed record format and carry their own
    tags; if ``lang``/``source`` are given they must agree with every record.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if source is not None:
        source = SourceKind.of(source)
        if source.kind.is_parallel:
            raise CorpusError("parallel sources are ingested with ingest_parallel")
    if path.suffix == ".shard":
        yield from _ingest_shard(path, lang, source, shard)
        return
    if lang is None or source is None:
        file_lang, file_source = parse_corpus_filename(path)
        lang = lang or file_lang
        source = source or file_source
    for line_no, line in _decoded_lines(path, on_error):
        text = normalize(line)
        if text:
            yield DocumentRecord(make_doc_id(shard, line_no), lang, source, text)


def ingest_parallel(path, lang: LanguageTag, *, shard: int = 0, on_error: str = "abort",
                    label: str = "") -> Iterator[ParallelPair]:
    """Read ``native<TAB>english`` lines as translated pairs."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    source = SourceKind(Source.PARALLEL_TRANSLATION, label)
    en = LanguageTag("en")
    for line_no, line in _decoded_lines(path, on_error):
        if not line.strip():
            continue
        cols = line.rstrip("\r\n").split("\t")
        if len(cols) != 2:
            raise IngestError(path, line_no + 1, f"expected 2 tab-separated columns, got {len(cols)}")
        src, tgt = normalize(cols[0]), normalize(cols[1])
        if not src or not tgt:
            log.warning("%s:%d: skipping pair with an empty side", path, line_no + 1)
            continue
        doc_id = make_doc_id(shard, line_no)
        yield ParallelPair(
            DocumentRecord(doc_id, lang, source, src),
            DocumentRecord(doc_id, en, source, tgt),
            PairKind.TRANSLATED,
        )


_SHARD_HEAD = struct.Struct("<I")


def write_shard(docs: Iterable[DocumentRecord], path) -> int:
    n = 0
    with open(path, "wb") as fh:
        for doc in docs:
            payload = bytes((doc.lang.index, doc.source.kind, int(doc.lang.transliterated)))
            payload += doc.text.encode("utf-8")
            fh.write(_SHARD_HEAD.pack(len(payload)))
            fh.write(payload)
            n += 1
    return n


def _ingest_shard(path: Path, lang, source, shard: int) -> Iterator[DocumentRecord]:
    data = path.read_bytes()
    pos = 0
    index = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise IngestError(path, index + 1, f"truncated length prefix at byte {pos}")
        (size,) = _SHARD_HEAD.unpack_from(data, pos)
        if size < 3 or pos + 4 + size > len(data):
            raise IngestError(path, index + 1, f"truncated record at byte {pos}")
        payload = data[pos + 4:pos + 4 + size]
        lang_index, kind, translit = payload[0], payload[1], payload[2]
        try:
            tag = LanguageTag(LANGUAGES[lang_index], bool(translit))
            rec_source = SourceKind(Source(kind))
            text = normalize(payload[3:].decode("utf-8"))
        except (IndexError, ValueError) as exc:
            raise IngestError(path, index + 1, f"bad record at byte {pos}: {exc}") from exc
        if lang is not None and tag != lang:
            raise IngestError(path, index + 1, f"record language {tag} != declared {lang}")
        if source is not None and rec_source.kind != source.kind:
            raise IngestError(path, index + 1, f"record source {rec_source} != declared {source}")
        if text:
            yield DocumentRecord(make_doc_id(shard, index), tag, source or rec_source, text)
        pos += 4 + size
        index += 1


# --- pretokenization and counting ------------------------------------------

def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def pretokenize(text: str) -> list[str]:
    """Whitespace split, then every punctuation character becomes its own word."""
    words = []
    for chunk in text.split():
        start = 0
        for i, ch in enumerate(chunk):
            if _is_punct(ch):
                if i > start:
                    words.append(chunk[start:i])
                words.append(ch)
                start = i + 1
        if start < len(chunk):
            words.append(chunk[start:])
    return words


@dataclass
class Counts:
    docs: int = 0
    words: int = 0
    chars: int = 0

    def __add__(self, other: Counts) -> Counts:
        return Counts(self.docs + other.docs, self.words + other.words, self.chars + other.chars)


@dataclass
class CorpusStats:
    """Document, word and character counts keyed by (language, source kind)."""

    counts: dict[tuple[LanguageTag, Source], Counts] = field(default_factory=dict)

    def add(self, lang: LanguageTag, source: Source, c: Counts) -> None:
        key = (lang, source)
        self.counts[key] = self.counts.get(key, Counts()) + c

    def __add__(self, other: CorpusStats) -> CorpusStats:
        out = CorpusStats(dict(self.counts))
        for (lang, source), c in other.counts.items():
            out.add(lang, source, c)
        return out

    def __eq__(self, other):
        if not isinstance(other, CorpusStats):
            return NotImplemented
        nz = lambda s: {k: v for k, v in s.counts.items() if v != Counts()}  # noqa: E731
        return nz(self) == nz(other)

    def words(self, lang: LanguageTag, source: Source) -> int:
        return self.counts.get((lang, source), Counts()).words

    def restrict(self, source: Source) -> dict[LanguageTag, int]:
        return {lang: c.words for (lang, s), c in self.counts.items() if s == source}

    def sources(self) -> set[Source]:
        return {s for _, s in self.counts}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lang", "source", "docs", "words", "chars"])
        for (lang, source) in sorted(self.counts, key=lambda k: (str(k[0]), k[1])):
            c = self.counts[(lang, source)]
            w.writerow([str(lang), str(source), c.docs, c.words, c.chars])
        return buf.getvalue()


def count_tokens(docs: Iterable[DocumentRecord]) -> CorpusStats:
    stats = CorpusStats()
    for doc in docs:
        stats.add(doc.lang, doc.source.kind, Counts(1, len(pretokenize(doc.text)), len(doc.text)))
    return stats


def worker_count() -> int:
    """Worker cap from ``CORPUSFORGE_THREADS`` (default: CPU count)."""
    raw = os.environ.get("CORPUSFORGE_THREADS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            raise CorpusError(f"CORPUSFORGE_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1
