"""MLM/TLM training instances and their binary record files."""

from __future__ import annotations

import enum
import math
import random
import struct
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import LANGUAGES, DocumentRecord, LanguageTag, PairKind, ParallelPair
from .seeding import rng_for
from .vocab import CLS, MASK, SEP, SPECIALS, Vocabulary, tokenize

MAGIC = b"MURC"
# Version 1: TLM layout is [CLS] src [SEP] tgt [SEP] with sequential positions.
VERSION = 1


class InstanceError(ValueError):
    pass


class RecordError(InstanceError):
    pass


class Objective(enum.IntEnum):
    MLM = 0
    TLM = 1


@dataclass(frozen=True)
class InstanceConfig:
    max_seq_len: int = 512
    mask_rate: float = 0.15
    mask_token_frac: float = 0.8
    random_frac: float = 0.1
    keep_frac: float = 0.1
    seed: int = 12345
    max_predictions: int | None = None

    def __post_init__(self):
        if self.max_seq_len < 4:
            raise InstanceError("max_seq_len must be at least 4")
        if not 0.0 < self.mask_rate < 1.0:
            raise InstanceError(f"mask_rate must lie in (0, 1), got {self.mask_rate}")
        fracs = (self.mask_token_frac, self.random_frac, self.keep_frac)
        if min(fracs) < 0 or abs(sum(fracs) - 1.0) > 1e-9:
            raise InstanceError(f"corruption fractions must be non-negative and sum to 1, got {fracs}")
        if self.max_predictions is None:
            object.__setattr__(self, "max_predictions", math.ceil(self.max_seq_len * self.mask_rate))
        if not 0 < self.max_predictions <= self.max_seq_len:
            raise InstanceError("max_predictions must lie in [1, max_seq_len]")


@dataclass(frozen=True)
class TrainingInstance:
    objective: Objective
    token_ids: tuple[int, ...]
    segment_ids: tuple[int, ...]
    masked_positions: tuple[int, ...]
    masked_labels: tuple[int, ...]
    lang_src: LanguageTag
    lang_tgt: LanguageTag | None = None
    pair_kind: PairKind = PairKind.NONE

    def validate(self, max_seq_len: int | None = None, max_predictions: int | None = None) -> None:
        ids, segs = self.token_ids, self.segment_ids
        if max_seq_len is not None and len(ids) > max_seq_len:
            raise InstanceError(f"instance of length {len(ids)} exceeds {max_seq_len}")
        if len(segs) != len(ids) or not ids or ids[0] != CLS:
            raise InstanceError("instance must start with [CLS] and carry one segment id per token")
        seps = [i for i, t in enumerate(ids) if t == SEP]
        if self.objective is Objective.MLM:
            if len(seps) != 1 or seps[0] != len(ids) - 1 or any(segs):
                raise InstanceError("MLM instance must end in its only [SEP] with segment 0 throughout")
            if self.lang_tgt is not None or self.pair_kind is not PairKind.NONE:
                raise InstanceError("MLM instance cannot carry a target language or pair kind")
        else:
            if len(seps) != 2 or seps[1] != len(ids) - 1 or not 1 < seps[0] < len(ids) - 2:
                raise InstanceError("TLM instance must be [CLS] src [SEP] tgt [SEP] with both sides non-empty")
            expected = tuple(0 if i <= seps[0] else 1 for i in range(len(ids)))
            if segs != expected:
                raise InstanceError("TLM segment ids do not match [SEP] placement")
            if self.lang_tgt is None or self.pair_kind is PairKind.NONE:
                raise InstanceError("TLM instance needs a target language and pair kind")
        pos = self.masked_positions
        if list(pos) != sorted(set(pos)) or len(pos) != len(self.masked_labels):
            raise InstanceError("masked positions must be sorted, unique and aligned with labels")
        if max_predictions is not None and len(pos) > max_predictions:
            raise InstanceError(f"{len(pos)} predictions exceed {max_predictions}")
        for p in pos:
            if not 0 < p < len(ids) or p in seps:
                raise InstanceError(f"masked position {p} points at a special slot")

    def restored(self) -> tuple[int, ...]:
        """Token ids with every corrupted position put back from its label."""
        ids = list(self.token_ids)
        for p, label in zip(self.masked_positions, self.masked_labels):
            ids[p] = label
        return tuple(ids)


def selection_count(n_candidates: int, cfg: InstanceConfig) -> int:
    if n_candidates <= 0:
        return 0
    n = math.floor(cfg.mask_rate * n_candidates + 0.5)
    return min(max(1, n), cfg.max_predictions, n_candidates)


def mask_tokens(ids: list[int], candidates: Sequence[int], rng: random.Random,
                cfg: InstanceConfig, vocab_size: int) -> tuple[list[int], tuple[int, ...], tuple[int, ...]]:
    """Corrupt a sample of ``candidates`` in place of a copy of ``ids``.

    Returns (corrupted ids, sorted positions, original labels).
    """
    k = selection_count(len(candidates), cfg)
    positions = sorted(rng.sample(list(candidates), k))
    out = list(ids)
    labels = []
    first_regular = len(SPECIALS)
    for p in positions:
        labels.append(ids[p])
        u = rng.random()
        if u < cfg.mask_token_frac:
            out[p] = MASK
        elif u < cfg.mask_token_frac + cfg.random_frac:
            out[p] = rng.randrange(first_regular, vocab_size)
    return out, tuple(positions), tuple(labels)


def mlm_from_ids(ids: Sequence[int], lang: LanguageTag, vocab_size: int, cfg: InstanceConfig,
                 key: Sequence[int]) -> list[TrainingInstance]:
    """Chunk ``ids`` and wrap each chunk as a masked [CLS] ... [SEP] instance."""
    span = cfg.max_seq_len - 2
    out = []
    for chunk_index, start in enumerate(range(0, len(ids), span)):
        chunk = list(ids[start:start + span])
        seq = [CLS, *chunk, SEP]
        rng = rng_for(cfg.seed, Objective.MLM, *key, chunk_index)
        corrupted, pos, labels = mask_tokens(seq, range(1, len(seq) - 1), rng, cfg, vocab_size)
        out.append(TrainingInstance(Objective.MLM, tuple(corrupted), (0,) * len(seq), pos, labels, lang))
    return out


def truncate_pair(src: list[int], tgt: list[int], budget: int) -> tuple[list[int], list[int]]:
    """Drop tokens from the end of the longer side (tgt on ties) until both fit."""
    src, tgt = list(src), list(tgt)
    while len(src) + len(tgt) > budget:
        if len(src) > len(tgt):
            src.pop()
        else:
            tgt.pop()
    return src, tgt


def tlm_from_ids(src: Sequence[int], tgt: Sequence[int], lang_src: LanguageTag, lang_tgt: LanguageTag,
                 kind: PairKind, vocab_size: int, cfg: InstanceConfig,
                 key: Sequence[int]) -> list[TrainingInstance]:
    if not src or not tgt:
        return []
    a, b = truncate_pair(src, tgt, cfg.max_seq_len - 3)
    seq = [CLS, *a, SEP, *b, SEP]
    segs = (0,) * (len(a) + 2) + (1,) * (len(b) + 1)
    candidates = [i for i in range(1, len(seq) - 1) if i != len(a) + 1]
    rng = rng_for(cfg.seed, Objective.TLM, kind, *key)
    corrupted, pos, labels = mask_tokens(seq, candidates, rng, cfg, vocab_size)
    return [TrainingInstance(Objective.TLM, tuple(corrupted), segs, pos, labels, lang_src, lang_tgt, kind)]


def build_mlm(doc: DocumentRecord, vocab: Vocabulary, cfg: InstanceConfig,
              copy: int = 0) -> list[TrainingInstance]:
    """MLM instances for one document. ``copy`` separates upsampled repeats."""
    return mlm_from_ids(tokenize(doc.text, vocab), doc.lang, len(vocab), cfg, (doc.id, copy))


def build_tlm(pair: ParallelPair, vocab: Vocabulary, cfg: InstanceConfig) -> list[TrainingInstance]:
    return tlm_from_ids(tokenize(pair.src.text, vocab), tokenize(pair.tgt.text, vocab),
                        pair.src.lang, pair.tgt.lang, pair.kind, len(vocab), cfg, (pair.src.id,))


# --- record files ------------------------------------------------------------
#
# header:  "MURC" | u8 version | 2-byte vocabulary digest prefix
# record:  u32 payload length | payload
# payload: u8 objective | u8 pair kind | u8 src lang | u8 tgt lang | u16 n
#          | n x u32 token ids | ceil(n/8) bytes segment bits (LSB first)
#          | u16 m | m x u32 positions | m x u32 labels
# Language bytes are the LANGUAGES index, +0x80 for transliterated; 0xFF = unset.

_HEADER = struct.Struct("<4sB2s")
_U32 = struct.Struct("<I")
_FIXED = struct.Struct("<BBBBH")
_U16 = struct.Struct("<H")
_NO_LANG = 0xFF


def _lang_byte(tag: LanguageTag | None) -> int:
    if tag is None:
        return _NO_LANG
    return tag.index | (0x80 if tag.transliterated else 0)


def _lang_from_byte(b: int) -> LanguageTag | None:
    if b == _NO_LANG:
        return None
    return LanguageTag(LANGUAGES[b & 0x7F], bool(b & 0x80))


def _pack_bits(bits: Sequence[int]) -> bytes:
    out = bytearray((len(bits) + 7) // 8)
    for i, bit in enumerate(bits):
        if bit:
            out[i >> 3] |= 1 << (i & 7)
    return bytes(out)


def _unpack_bits(data: bytes, n: int) -> tuple[int, ...]:
    return tuple((data[i >> 3] >> (i & 7)) & 1 for i in range(n))


def encode_instance(inst: TrainingInstance) -> bytes:
    n, m = len(inst.token_ids), len(inst.masked_positions)
    if n > 0xFFFF or m > 0xFFFF:
        raise RecordError("instance too long for the record format")
    return b"".join((
        _FIXED.pack(inst.objective, inst.pair_kind, _lang_byte(inst.lang_src), _lang_byte(inst.lang_tgt), n),
        struct.pack(f"<{n}I", *inst.token_ids),
        _pack_bits(inst.segment_ids),
        _U16.pack(m),
        struct.pack(f"<{m}I", *inst.masked_positions),
        struct.pack(f"<{m}I", *inst.masked_labels),
    ))


def decode_instance(payload: bytes, offset: int = 0) -> TrainingInstance:
    try:
        obj, kind, src, tgt, n = _FIXED.unpack_from(payload, 0)
        pos = _FIXED.size
        ids = struct.unpack_from(f"<{n}I", payload, pos)
        pos += 4 * n
        nbits = (n + 7) // 8
        if pos + nbits > len(payload):
            raise struct.error("segment bits run past the payload")
        segs = _unpack_bits(payload[pos:pos + nbits], n)
        pos += nbits
        (m,) = _U16.unpack_from(payload, pos)
        pos += 2
        positions = struct.unpack_from(f"<{m}I", payload, pos)
        labels = struct.unpack_from(f"<{m}I", payload, pos + 4 * m)
        pos += 8 * m
        lang_src = _lang_from_byte(src)
        if lang_src is None:
            raise ValueError("source language unset")
        inst = TrainingInstance(Objective(obj), ids, segs, positions, labels, lang_src,
                                _lang_from_byte(tgt), PairKind(kind))
    except (struct.error, ValueError, IndexError) as exc:
        raise RecordError(f"malformed record at byte {offset}: {exc}") from exc
    if pos != len(payload):
        raise RecordError(f"record at byte {offset} has {len(payload) - pos} trailing bytes")
    return inst


def write_records(instances: Iterable[TrainingInstance], path, vocab: Vocabulary | bytes | None = None) -> int:
    """Write a record file; returns the number of records."""
    digest = vocab.digest() if isinstance(vocab, Vocabulary) else (vocab or b"\0\0")
    count = 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, digest[:2]))
        for inst in instances:
            payload = encode_instance(inst)
            fh.write(_U32.pack(len(payload)))
            fh.write(payload)
            count += 1
    return count


@dataclass
class RecordFile:
    version: int
    vocab_prefix: bytes
    instances: list[TrainingInstance] = field(default_factory=list)


def read_record_file(path, vocab: Vocabulary | None = None) -> RecordFile:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise RecordError(f"{path}: truncated header at byte {len(data)}")
    magic, version, prefix = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise RecordError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise RecordError(f"{path}: record format version {version}, expected {VERSION}")
    if vocab is not None and vocab.digest()[:2] != prefix:
        raise RecordError(f"{path}: written for a different vocabulary")
    out = RecordFile(version, prefix)
    pos = _HEADER.size
    while pos < len(data):
        if pos + 4 > len(data):
            raise RecordError(f"{path}: truncated length prefix at byte {pos}")
        (size,) = _U32.unpack_from(data, pos)
        if pos + 4 + size > len(data):
            raise RecordError(f"{path}: truncated record at byte {pos}")
        out.instances.append(decode_instance(data[pos + 4:pos + 4 + size], pos))
        pos += 4 + size
    return out


def read_records(path, vocab: Vocabulary | None = None) -> list[TrainingInstance]:
    return read_record_file(path, vocab).instances
