"""Pipeline stages shared by the CLI subcommands."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .config import PipelineConfig
from .corpus import (CorpusStats, DocumentRecord, LanguageTag, PairKind, ParallelPair, Source,
                     count_tokens, ingest, ingest_parallel, worker_count)
from .instances import TrainingInstance, build_mlm, build_tlm, write_records
from .sampler import SamplingPlan, build_plan, materialize
from .seeding import derive_seed
from .translit import RomanizationTable, bundled_tables, make_translit_pairs
from .vocab import (FertilityReport, Vocabulary, collect_word_freqs, fertility, script_composition,
                    train_from_languages)

log = logging.getLogger(__name__)


class MissingInputs(Exception):
    def __init__(self, paths):
        self.paths = [str(p) for p in paths]
        super().__init__("missing input files:\n  " + "\n  ".join(self.paths))


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")


class _stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, (StageError, MissingInputs)):
            raise StageError(self.name, exc) from exc
        return False


def check_inputs(cfg: PipelineConfig) -> None:
    missing = cfg.missing_paths()
    if missing:
        raise MissingInputs(missing)


@dataclass
class Corpora:
    docs: list[DocumentRecord] = field(default_factory=list)
    translations: list[ParallelPair] = field(default_factory=list)

    def by_source(self, source: Source) -> list[DocumentRecord]:
        return [d for d in self.docs if d.source.kind == source]


def load_corpora(cfg: PipelineConfig) -> Corpora:
    """Ingest every declared file; shard indices follow declaration order."""
    check_inputs(cfg)
    out = Corpora()
    with _stage("ingest"):
        shard = 0
        for decl in cfg.corpora:
            out.docs.extend(ingest(decl.path, decl.lang, decl.source, shard=shard, on_error=cfg.on_error))
            shard += 1
        for decl in cfg.parallel:
            out.translations.extend(ingest_parallel(decl.path, decl.lang, shard=shard,
                                                    on_error=cfg.on_error, label=decl.name))
            shard += 1
    return out


def stats_of(corpora: Corpora) -> CorpusStats:
    with _stage("stats"):
        return count_tokens(corpora.docs)


def plan_of(stats: CorpusStats, cfg: PipelineConfig) -> SamplingPlan:
    with _stage("plan"):
        return build_plan(stats, cfg.alpha, cfg.plan_source)


def load_tables(cfg: PipelineConfig) -> dict[str, RomanizationTable]:
    tables = bundled_tables()
    for path in cfg.translit_tables:
        table = RomanizationTable.load(path)
        tables[table.script] = table
    return tables


@dataclass
class Sampled:
    """Documents fed to MLM, after upsampling the plan's source."""

    docs: list[DocumentRecord]
    rows: list[tuple[str, str, int, float, int, int]]  # lang, source, docs_in, m, docs_out, words_out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lang", "source", "docs_in", "multiplier", "docs_out", "words_out"])
        for lang, source, n_in, m, n_out, words in self.rows:
            w.writerow([lang, source, n_in, f"{m:.6f}", n_out, words])
        return buf.getvalue()


def upsample(corpora: Corpora, plan: SamplingPlan, cfg: PipelineConfig) -> Sampled:
    with _stage("upsample"):
        groups: dict[tuple[LanguageTag, Source], list[DocumentRecord]] = {}
        for doc in corpora.docs:
            groups.setdefault((doc.lang, doc.source.kind), []).append(doc)
        docs, rows = [], []
        for (lang, source) in sorted(groups, key=lambda k: (str(k[0]), k[1])):
            group = groups[(lang, source)]
            m = plan.entries[lang].multiplier if source == cfg.plan_source and lang in plan.entries else 1.0
            out = list(materialize(group, m, derive_seed(cfg.seed, lang.index, int(lang.transliterated), source)))
            words = count_tokens(out).words(lang, source)
            rows.append((str(lang), str(source), len(group), m, len(out), words))
            docs.extend(out)
        return Sampled(docs, rows)


@dataclass
class TranslitResult:
    pairs: list[ParallelPair]
    skipped: Counter

    def to_csv(self) -> str:
        made = Counter(str(p.src.lang) for p in self.pairs)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "pairs", "skipped"])
        for key in sorted(set(made) | set(self.skipped)):
            w.writerow([key, made.get(key, 0), self.skipped.get(key, 0)])
        return buf.getvalue()


def transliterate(corpora: Corpora, cfg: PipelineConfig) -> TranslitResult:
    with _stage("translit"):
        if not cfg.translit_enabled:
            return TranslitResult([], Counter())
        skipped: Counter = Counter()
        pairs = list(make_translit_pairs(corpora.by_source(Source.WIKIPEDIA), load_tables(cfg),
                                         skipped, cfg.translit_exclude))
        return TranslitResult(pairs, skipped)


def vocab_training_docs(sampled: Sampled, corpora: Corpora, translit: TranslitResult) -> list[DocumentRecord]:
    docs = list(sampled.docs)
    for pair in corpora.translations + translit.pairs:
        docs.extend((pair.src, pair.tgt))
    return docs


def train(docs: list[DocumentRecord], cfg: PipelineConfig) -> Vocabulary:
    with _stage("train-vocab"):
        counts = collect_word_freqs(docs, cfg.vocab.max_word_length)
        if counts.dropped:
            log.info("dropped %d over-long words", counts.dropped)
        return train_from_languages(counts, cfg.vocab)


def fertility_docs(corpora: Corpora, translit: TranslitResult) -> list[DocumentRecord]:
    return corpora.docs + [p.tgt for p in translit.pairs]


def fertility_of(docs: list[DocumentRecord], vocab: Vocabulary) -> FertilityReport:
    with _stage("fertility"):
        return fertility(docs, vocab)


@dataclass
class BaselineComparison:
    """Fertility of the full-sample vocabulary against an equal-size English-only one."""

    full: FertilityReport
    english: FertilityReport
    full_size: int
    english_size: int

    def rows(self):
        for lang in sorted(self.full.counts, key=str):
            if lang in self.english.counts:
                yield lang, self.full.fertility(lang), self.english.fertility(lang)


def english_baseline(cfg: PipelineConfig) -> BaselineComparison:
    """Train the configured vocabulary and an English-only one of the same size.

    The English-only vocabulary is seeded with every character of the full
    sample, so both can spell every Indic word and neither needs [UNK]; the
    comparison isolates what the non-English merges buy.
    """
    corpora = load_corpora(cfg)
    plan = plan_of(stats_of(corpora), cfg)
    sampled = upsample(corpora, plan, cfg)
    translit = transliterate(corpora, cfg)
    train_docs = vocab_training_docs(sampled, corpora, translit)
    full = train(train_docs, cfg)
    alphabet = "".join(sorted({ch for d in train_docs for ch in d.text if not ch.isspace()}))
    english_docs = [d for d in train_docs if d.lang.code == "en"]
    en_cfg = replace(cfg, vocab=replace(cfg.vocab, target_size=len(full), alphabet=alphabet))
    english = train(english_docs, en_cfg)
    eval_docs = [d for d in corpora.docs if d.lang.code != "en"]
    return BaselineComparison(fertility_of(eval_docs, full), fertility_of(eval_docs, english),
                              len(full), len(english))


def _parallel_map(fn, items):
    workers = worker_count()
    if workers <= 1 or len(items) < 64:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=32))


def build_instances(sampled: Sampled, pairs: list[ParallelPair], vocab: Vocabulary,
                    cfg: PipelineConfig) -> tuple[list[TrainingInstance], list[TrainingInstance]]:
    with _stage("instances"):
        seen: Counter = Counter()
        jobs = []
        for doc in sampled.docs:
            jobs.append((doc.id, seen[doc.id], doc))
            seen[doc.id] += 1
        jobs.sort(key=lambda j: (j[0], j[1]))
        icfg = cfg.instances
        mlm = [inst for batch in _parallel_map(lambda j: build_mlm(j[2], vocab, icfg, j[1]), jobs)
               for inst in batch]
        ordered = sorted(pairs, key=lambda p: (p.src.id, p.kind))
        tlm = [inst for batch in _parallel_map(lambda p: build_tlm(p, vocab, icfg), ordered)
               for inst in batch]
        for inst in mlm + tlm:
            inst.validate(icfg.max_seq_len, icfg.max_predictions)
        return mlm, tlm


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_build(cfg: PipelineConfig) -> dict:
    """Every stage end to end; writes artifacts plus manifest.json under ``cfg.out``."""
    corpora = load_corpora(cfg)
    stats = stats_of(corpora)
    plan = plan_of(stats, cfg)
    sampled = upsample(corpora, plan, cfg)
    translit = transliterate(corpora, cfg)
    vocab = train(vocab_training_docs(sampled, corpora, translit), cfg)
    report = fertility_of(fertility_docs(corpora, translit), vocab)
    pairs = corpora.translations + translit.pairs
    mlm, tlm = build_instances(sampled, pairs, vocab, cfg)

    with _stage("write"):
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        texts = {
            "stats.csv": stats.to_csv(),
            "plan.csv": plan.to_csv(),
            "sampled.csv": sampled.to_csv(),
            "fertility.csv": report.to_csv(),
            "script_composition.csv": script_composition(vocab).to_csv(),
            "translit.csv": translit.to_csv(),
        }
        for name, text in texts.items():
            (out / name).write_text(text, encoding="utf-8")
        vocab.save(out / "vocab.txt")
        write_records(mlm, out / "mlm.rec", vocab)
        write_records(tlm, out / "tlm.rec", vocab)

        tlm_kinds = Counter(str(i.pair_kind) for i in tlm)
        files = sorted([*texts, "vocab.txt", "mlm.rec", "tlm.rec"])
        manifest = {
            "seed": cfg.seed,
            "alpha": cfg.alpha,
            "counts": {
                "documents": len(corpora.docs),
                "sampled_documents": len(sampled.docs),
                "translation_pairs": len(corpora.translations),
                "transliteration_pairs": len(translit.pairs),
                "transliteration_skipped": dict(sorted(translit.skipped.items())),
                "vocab_size": len(vocab),
                "mlm_instances": len(mlm),
                "tlm_instances": {str(k): tlm_kinds.get(str(k), 0)
                                  for k in (PairKind.TRANSLATED, PairKind.TRANSLITERATED)},
                "tlm_pairs_skipped": len(pairs) - len(tlm),
            },
            "files": {name: sha256_file(out / name) for name in files},
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
                                           encoding="utf-8")
    return manifest

