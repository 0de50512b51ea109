"""Language-balanced upsampling multipliers and upsampled document streams."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field

from .corpus import CorpusStats, DocumentRecord, LanguageTag, Source
from .seeding import uniform

DEFAULT_ALPHA = 0.3


class DomainError(ValueError):
    pass


def _check_alpha(alpha: float) -> None:
    if not (0.0 <= alpha <= 1.0) or math.isnan(alpha):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")


def multiplier(n_i: float, n_max: float, alpha: float) -> float:
    """(n_max / n_i) ** (1 - alpha)."""
    _check_alpha(alpha)
    if not n_i > 0:
        raise DomainError(f"count must be positive, got {n_i}")
    if n_i > n_max:
        raise DomainError(f"count {n_i} exceeds the maximum {n_max}")
    return (n_max / n_i) ** (1.0 - alpha)


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class PlanEntry:
    lang: LanguageTag
    n: int
    multiplier: float

    @property
    def upsampled(self) -> int:
        return round_half_up(self.multiplier * self.n)


@dataclass
class SamplingPlan:
    alpha: float
    entries: dict[LanguageTag, PlanEntry]
    excluded: list[LanguageTag] = field(default_factory=list)

    def __getitem__(self, lang: LanguageTag) -> PlanEntry:
        return self.entries[lang]

    def total_upsampled(self) -> int:
        return sum(e.upsampled for e in self.entries.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lang", "n", "multiplier", "upsampled"])
        for lang in sorted(self.entries, key=str):
            e = self.entries[lang]
            w.writerow([str(lang), e.n, f"{e.multiplier:.6f}", e.upsampled])
        return buf.getvalue()


def build_plan(stats: CorpusStats | Mapping[LanguageTag, int], alpha: float = DEFAULT_ALPHA,
               source: Source | None = None) -> SamplingPlan:
    """Multipliers for every language with a positive word count.

    ``stats`` is either per-language counts or a CorpusStats; the latter must
    hold a single source kind unless ``source`` picks one.
    """
    _check_alpha(alpha)
    if isinstance(stats, CorpusStats):
        if source is None:
            sources = stats.sources()
            if len(sources) > 1:
                raise DomainError(f"stats span several sources {sorted(map(str, sources))}; pick one")
            source = next(iter(sources), Source.WIKIPEDIA)
        counts = stats.restrict(source)
    else:
        counts = dict(stats)
    positive = {lang: n for lang, n in counts.items() if n > 0}
    if not positive:
        raise DomainError("empty corpus set")
    n_max = max(positive.values())
    entries = {lang: PlanEntry(lang, n, multiplier(n, n_max, alpha)) for lang, n in positive.items()}
    excluded = sorted((lang for lang, n in counts.items() if n <= 0), key=str)
    return SamplingPlan(alpha, entries, excluded)


def materialize(docs: Iterable[DocumentRecord], m: float, seed: int) -> Iterator[DocumentRecord]:
    """floor(m) full passes, then a Bernoulli(m - floor(m)) pass keyed on doc id."""
    if not m >= 1.0:
        raise DomainError(f"multiplier must be >= 1, got {m}")
    docs = list(docs)
    whole = math.floor(m)
    frac = m - whole
    for _ in range(whole):
        yield from docs
    if frac > 0:
        for doc in docs:
            if uniform(seed, doc.id) < frac:
                yield doc
