"""Cased WordPiece vocabulary: training, greedy tokenization and vocabulary metrics."""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import unicodedata
from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import regex

from .corpus import DocumentRecord, LanguageTag, pretokenize

log = logging.getLogger(__name__)

SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
PAD, UNK, CLS, SEP, MASK = range(len(SPECIALS))
DEFAULT_PREFIX = "##"


class VocabError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Vocabulary:
    tokens: tuple[str, ...]
    prefix: str = DEFAULT_PREFIX
    _index: dict = field(init=False, repr=False)
    _max_body: int = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.tokens[:len(SPECIALS)] != SPECIALS:
            raise VocabError(f"vocabulary must start with {SPECIALS}")
        index = {}
        for i, tok in enumerate(self.tokens):
            if tok in index:
                raise VocabError(f"duplicate token {tok!r}")
            if i >= len(SPECIALS):
                if tok in SPECIALS:
                    raise VocabError(f"special {tok!r} appears twice")
                if not tok or any(ch.isspace() for ch in tok):
                    raise VocabError(f"token {i} is empty or contains whitespace")
                if tok.startswith(self.prefix) and len(tok) == len(self.prefix):
                    raise VocabError(f"continuation token {i} has an empty body")
            index[tok] = i
        object.__setattr__(self, "_index", index)
        body = max((len(self.body(t)) for t in self.tokens[len(SPECIALS):]), default=0)
        object.__setattr__(self, "_max_body", body)
        object.__setattr__(self, "_cache", {})

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self._index

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.tokens == other.tokens and self.prefix == other.prefix

    def __hash__(self):
        return hash((self.tokens, self.prefix))

    def id_of(self, token: str) -> int:
        return self._index[token]

    def get(self, token: str) -> int | None:
        return self._index.get(token)

    def is_continuation(self, token: str) -> bool:
        return token.startswith(self.prefix) and token not in SPECIALS

    def body(self, token: str) -> str:
        return token[len(self.prefix):] if self.is_continuation(token) else token

    @property
    def max_piece_chars(self) -> int:
        return self._max_body

    def non_special_ids(self) -> range:
        return range(len(SPECIALS), len(self.tokens))

    def to_text(self) -> str:
        return "".join(t + "\n" for t in self.tokens)

    def digest(self) -> bytes:
        return hashlib.sha256(self.to_text().encode("utf-8")).digest()

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_text().encode("utf-8"))

    @classmethod
    def load(cls, path, prefix: str = DEFAULT_PREFIX) -> Vocabulary:
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls(tuple(lines), prefix)


# --- training ----------------------------------------------------------------

@dataclass(frozen=True)
class VocabTrainConfig:
    target_size: int = 8000
    smoothing_exponent: float = 1.0
    min_word_frequency: float = 1
    max_word_length: int = 100
    prefix: str = DEFAULT_PREFIX
    # Characters seeded in both positional forms even if absent from the data.
    alphabet: str = ""

    def __post_init__(self):
        if self.target_size <= len(SPECIALS):
            raise VocabError(f"target_size must exceed the {len(SPECIALS)} specials")
        if not 0.0 < self.smoothing_exponent <= 1.0:
            raise VocabError(f"smoothing_exponent must lie in (0, 1], got {self.smoothing_exponent}")
        if self.min_word_frequency <= 0:
            raise VocabError("min_word_frequency must be positive")
        if self.max_word_length <= 0:
            raise VocabError("max_word_length must be positive")


@dataclass
class WordCounts:
    by_lang: dict[LanguageTag, Counter] = field(default_factory=dict)
    dropped: int = 0


def collect_word_freqs(docs: Iterable[DocumentRecord], max_word_length: int = 100) -> WordCounts:
    out = WordCounts()
    for doc in docs:
        counter = out.by_lang.setdefault(doc.lang, Counter())
        for word in pretokenize(doc.text):
            if len(word) > max_word_length:
                out.dropped += 1
            else:
                counter[word] += 1
    return out


def smooth_and_merge(per_lang: Mapping[LanguageTag, Mapping[str, float]],
                     exponent: float = 1.0) -> dict[str, float]:
    """Merge per-language word counts after rebalancing language mass.

    Language l with mass T_l of total T ends up with mass
    T * p_l**exponent / sum_k p_k**exponent where p_l = T_l / T, so the
    total is preserved, exponent 1 is plain summation and smaller exponents
    flatten the languages towards equal mass.
    """
    if not 0.0 < exponent <= 1.0:
        raise VocabError(f"smoothing exponent must lie in (0, 1], got {exponent}")
    merged: dict[str, float] = defaultdict(int)
    langs = sorted(per_lang, key=str)
    if exponent == 1.0:
        for lang in langs:
            for word, c in per_lang[lang].items():
                merged[word] += c
        return dict(merged)
    mass = {lang: math.fsum(per_lang[lang].values()) for lang in langs}
    total = math.fsum(mass.values())
    if total <= 0:
        return {}
    powered = {lang: (mass[lang] / total) ** exponent for lang in langs if mass[lang] > 0}
    norm = math.fsum(powered.values())
    for lang, pw in powered.items():
        scale = total * pw / norm / mass[lang]
        for word, c in per_lang[lang].items():
            merged[word] += c * scale
    return dict(merged)


def _seed_pieces(words: Iterable[str], prefix: str) -> set[str]:
    pieces = set()
    for w in words:
        pieces.add(w[0])
        pieces.update(prefix + ch for ch in w[1:])
    return pieces


_EPS = 1e-9


def train_vocab(freqs: Mapping[str, float], config: VocabTrainConfig = VocabTrainConfig()) -> Vocabulary:
    """Bottom-up WordPiece induction.

    The seed holds each character in the positional form(s) it occurs in,
    word-initial or continuation. Each round adds the merge of the adjacent
    pair maximising count(pair) / (count(left) * count(right)); ties go to
    the lexicographically smallest merged token. Training stops at
    ``target_size`` or when no pair reaches ``min_word_frequency``.
    """
    prefix = config.prefix
    words = sorted((w, f) for w, f in freqs.items() if w and f > 0)
    if not words:
        raise VocabError("no words to train on")
    seed = _seed_pieces((w for w, _ in words), prefix)
    for ch in sorted(set(config.alphabet)):
        if not ch.isspace():
            seed.update((ch, prefix + ch))
    if config.target_size < len(SPECIALS) + len(seed):
        raise VocabError(f"target_size {config.target_size} is smaller than the seed "
                         f"({len(SPECIALS)} specials + {len(seed)} characters)")
    tokens = list(SPECIALS) + sorted(seed)
    known = set(tokens)

    segs = [[w[0]] + [prefix + ch for ch in w[1:]] for w, _ in words]
    weights = [f for _, f in words]
    piece_count: dict[str, float] = defaultdict(float)
    pair_count: dict[tuple[str, str], float] = defaultdict(float)
    pair_words: dict[tuple[str, str], set[int]] = defaultdict(set)

    def account(i: int, sign: int) -> None:
        seg, f = segs[i], weights[i] * sign
        for p in seg:
            piece_count[p] += f
        for pair in zip(seg, seg[1:]):
            c = pair_count[pair] + f
            if sign > 0:
                pair_count[pair] = c
                pair_words[pair].add(i)
            elif c <= _EPS:
                del pair_count[pair]
                pair_words.pop(pair, None)
            else:
                pair_count[pair] = c
                pair_words[pair].discard(i)

    for i in range(len(segs)):
        account(i, +1)

    cut = len(prefix)
    while len(tokens) < config.target_size:
        best_key = None
        for (left, right), c in pair_count.items():
            if c < config.min_word_frequency:
                continue
            key = (-c / (piece_count[left] * piece_count[right]), left + right[cut:], left, right)
            if best_key is None or key < best_key:
                best_key = key
        if best_key is None:
            break
        _, merged, left, right = best_key
        for i in sorted(pair_words[(left, right)]):
            account(i, -1)
            seg = segs[i]
            out, j = [], 0
            while j < len(seg):
                if j + 1 < len(seg) and seg[j] == left and seg[j + 1] == right:
                    out.append(merged)
                    j += 2
                else:
                    out.append(seg[j])
                    j += 1
            segs[i] = out
            account(i, +1)
        if merged not in known:
            known.add(merged)
            tokens.append(merged)
    return Vocabulary(tuple(tokens), prefix)


def train_from_languages(counts: WordCounts | Mapping[LanguageTag, Mapping[str, float]],
                         config: VocabTrainConfig = VocabTrainConfig()) -> Vocabulary:
    per_lang = counts.by_lang if isinstance(counts, WordCounts) else counts
    return train_vocab(smooth_and_merge(per_lang, config.smoothing_exponent), config)


# --- tokenization ------------------------------------------------------------

_CACHE_LIMIT = 1 << 18


def _wordpiece(vocab: Vocabulary, word: str) -> tuple[int, ...]:
    cached = vocab._cache.get(word)
    if cached is not None:
        return cached
    ids = _greedy(vocab, word)
    if len(vocab._cache) >= _CACHE_LIMIT:
        vocab._cache.clear()
    vocab._cache[word] = ids
    return ids


def _greedy(vocab: Vocabulary, word: str) -> tuple[int, ...]:
    ids = []
    start, n = 0, len(word)
    prefix = vocab.prefix
    limit = vocab.max_piece_chars
    while start < n:
        end = min(n, start + limit)
        hit = None
        while end > start:
            piece = word[start:end] if start == 0 else prefix + word[start:end]
            hit = vocab.get(piece)
            if hit is not None and hit >= len(SPECIALS):
                break
            hit = None
            end -= 1
        if hit is None:
            return (UNK,)
        ids.append(hit)
        start = end
    return tuple(ids)


def tokenize_word(word: str, vocab: Vocabulary) -> list[int]:
    """Greedy longest-match pieces of one word; [UNK] alone if it gets stuck."""
    return list(_wordpiece(vocab, word))


def tokenize(text: str, vocab: Vocabulary) -> list[int]:
    ids = []
    for word in pretokenize(text):
        ids.extend(_wordpiece(vocab, word))
    return ids


def detokenize(ids: Sequence[int], vocab: Vocabulary) -> str:
    words: list[str] = []
    for i in ids:
        if not 0 <= i < len(vocab):
            raise VocabError(f"token id {i} out of range for vocabulary of size {len(vocab)}")
        tok = vocab.tokens[i]
        if vocab.is_continuation(tok) and words:
            words[-1] += vocab.body(tok)
        else:
            words.append(vocab.body(tok))
    return " ".join(words)


# --- metrics -----------------------------------------------------------------

@dataclass
class FertilityReport:
    counts: dict[LanguageTag, tuple[int, int]] = field(default_factory=dict)  # (words, subwords)
    warnings: list[str] = field(default_factory=list)

    def fertility(self, lang: LanguageTag) -> float:
        words, subwords = self.counts[lang]
        return subwords / words

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lang", "words", "subwords", "fertility"])
        for lang in sorted(self.counts, key=str):
            words, subwords = self.counts[lang]
            w.writerow([str(lang), words, subwords, f"{subwords / words:.6f}"])
        return buf.getvalue()


def fertility(docs: Iterable[DocumentRecord], vocab: Vocabulary,
              langs: Iterable[LanguageTag] | None = None) -> FertilityReport:
    """Subwords per pretokenized word for each language; [UNK] counts as one."""
    words: Counter = Counter()
    subwords: Counter = Counter()
    for doc in docs:
        for word in pretokenize(doc.text):
            words[doc.lang] += 1
            subwords[doc.lang] += len(_wordpiece(vocab, word))
    report = FertilityReport()
    for lang in sorted(set(words) | set(langs or ()), key=str):
        if words[lang] == 0:
            msg = f"{lang}: no words, fertility undefined"
            log.warning(msg)
            report.warnings.append(msg)
            continue
        report.counts[lang] = (words[lang], subwords[lang])
    return report


SCRIPT_CATEGORIES = ("Latin", "Devanagari", "Bengali", "Gujarati", "Gurmukhi", "Kannada",
                     "Malayalam", "Oriya", "Tamil", "Telugu", "Arabic")
OTHER = "Other"
_SCX = {name: regex.compile(rf"\p{{scx={name}}}") for name in SCRIPT_CATEGORIES}


@lru_cache(maxsize=4096)
def _char_scripts(ch: str) -> frozenset[str]:
    return frozenset(name for name, pat in _SCX.items() if pat.match(ch))


def categorize(text: str) -> str:
    """Script category of a piece: every non-digit character must fit one script."""
    shared = None
    for ch in text:
        if unicodedata.category(ch) == "Nd":
            continue
        scripts = _char_scripts(ch)
        shared = scripts if shared is None else shared & scripts
        if not shared:
            return OTHER
    if shared is None or len(shared) != 1:
        return OTHER
    return next(iter(shared))


@dataclass
class ScriptComposition:
    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def percent(self, category: str) -> float:
        total = self.total
        return 100.0 * self.counts.get(category, 0) / total if total else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["script", "count", "percent"])
        for cat in (*SCRIPT_CATEGORIES, OTHER):
            w.writerow([cat, self.counts.get(cat, 0), f"{self.percent(cat):.4f}"])
        return buf.getvalue()


def script_composition(vocab: Vocabulary) -> ScriptComposition:
    counts = dict.fromkeys((*SCRIPT_CATEGORIES, OTHER), 0)
    for tok in vocab.tokens[len(SPECIALS):]:
        counts[categorize(vocab.body(tok))] += 1
    return ScriptComposition(counts)
