"""Independent reference implementations used by the tests."""

import itertools
import random
from functools import lru_cache

from corpusforge.vocab import SPECIALS, UNK, Vocabulary


class SegmentationOracle:
    """Brute-force segmentation over a fixed vocabulary.

    ``all(word)`` enumerates every cut of ``word`` into vocabulary pieces.
    ``longest_first(word)`` keeps the one cut whose every piece is the longest
    vocabulary match at its offset; at most one cut can satisfy that, and if
    none does the word is [UNK], as for a tokenizer that never backtracks.
    """

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self.pieces = frozenset(vocab.tokens[len(SPECIALS):])
        self.prefix = vocab.prefix
        self._suffix = lru_cache(maxsize=None)(self._segment_suffix)

    def _piece(self, text, initial):
        return text if initial else self.prefix + text

    def _segment_suffix(self, rest, initial):
        # cuts of ``rest`` as tuples of piece body lengths
        if not rest:
            return ((),)
        out = []
        for end in range(1, len(rest) + 1):
            if self._piece(rest[:end], initial) in self.pieces:
                out.extend((end,) + tail for tail in self._suffix(rest[end:], False))
        return tuple(out)

    def all(self, word):
        return self._suffix(word, True)

    def longest_first(self, word):
        n = len(word)
        longest = [None] * n
        for start in range(n):
            for end in range(n, start, -1):
                if self._piece(word[start:end], start == 0) in self.pieces:
                    longest[start] = end
                    break
        found = []
        for seg in self.all(word):
            start = 0
            for size in seg:
                if longest[start] != start + size:
                    break
                start += size
            else:
                found.append(seg)
        assert len(found) <= 1
        if not found:
            return [UNK]
        ids, start = [], 0
        for size in found[0]:
            ids.append(self.vocab.id_of(self._piece(word[start:start + size], start == 0)))
            start += size
        return ids


def random_vocab(rng: random.Random, alphabet="abcd", max_tokens=20, max_len=4,
                 cover=False) -> Vocabulary:
    """Random vocabulary of at most ``max_tokens`` tokens (specials included).

    With ``cover`` every letter is present in both positional forms, so no
    word falls back to [UNK].
    """
    chosen = set(alphabet) | {"##" + ch for ch in alphabet} if cover else set()
    n = rng.randint(len(chosen), max_tokens - len(SPECIALS))
    while len(chosen) < n:
        body = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, max_len)))
        chosen.add(body if rng.random() < 0.5 else "##" + body)
    return Vocabulary(SPECIALS + tuple(sorted(chosen)))


def all_words(alphabet="abcd", max_len=8):
    for n in range(1, max_len + 1):
        for letters in itertools.product(alphabet, repeat=n):
            yield "".join(letters)


def random_instance(rng: random.Random, vocab_size=1000, max_len=64):
    """A valid TrainingInstance with random shape, masking and languages.

    Returns (instance, uncorrupted token ids).
    """
    from corpusforge.corpus import LANGUAGES, LanguageTag, PairKind
    from corpusforge.instances import Objective, TrainingInstance
    from corpusforge.vocab import CLS, MASK, SEP

    def lang(tr_ok=True):
        code = rng.choice(LANGUAGES)
        return LanguageTag(code, tr_ok and code != "en" and rng.random() < 0.3)

    def body(n):
        return [rng.randrange(len(SPECIALS), vocab_size) for _ in range(n)]

    if rng.random() < 0.5:
        seq = [CLS, *body(rng.randint(1, max_len - 2)), SEP]
        segs = [0] * len(seq)
        seps = {len(seq) - 1}
        meta = dict(objective=Objective.MLM, lang_src=lang())
    else:
        a = rng.randint(1, max_len - 4)
        b = rng.randint(1, max_len - 3 - a)
        seq = [CLS, *body(a), SEP, *body(b), SEP]
        segs = [0] * (a + 2) + [1] * (b + 1)
        seps = {a + 1, len(seq) - 1}
        kind = rng.choice([PairKind.TRANSLATED, PairKind.TRANSLITERATED])
        meta = dict(objective=Objective.TLM, lang_src=lang(False), lang_tgt=lang(), pair_kind=kind)
    candidates = [i for i in range(1, len(seq)) if i not in seps]
    positions = sorted(rng.sample(candidates, rng.randint(0, len(candidates))))
    corrupted = list(seq)
    for p in positions:
        corrupted[p] = rng.choice([MASK, seq[p], rng.randrange(len(SPECIALS), vocab_size)])
    inst = TrainingInstance(token_ids=tuple(corrupted), segment_ids=tuple(segs),
                            masked_positions=tuple(positions), masked_labels=tuple(seq[p] for p in positions),
                            **meta)
    return inst, tuple(seq)
