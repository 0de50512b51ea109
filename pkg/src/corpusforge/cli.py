"""Command-line entry point: ``corpusforge <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import pipeline
from .config import ConfigError, PipelineConfig, load_config
from .corpus import LanguageTag
from .pipeline import MissingInputs, StageError
from .translit import language_table, romanize
from .vocab import Vocabulary, detokenize, tokenize

log = logging.getLogger("corpusforge")

EXIT_STAGE = 1
EXIT_INPUT = 2


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, alpha=args.alpha, out=args.out)


def _emit(text: str, args, default_name: str | None = None) -> None:
    sys.stdout.write(text)
    if getattr(args, "write", False) and default_name:
        cfg_out = Path(args.out) if args.out else _config(args).out
        cfg_out.mkdir(parents=True, exist_ok=True)
        (cfg_out / default_name).write_text(text, encoding="utf-8")


def cmd_stats(args) -> int:
    cfg = _config(args)
    corpora = pipeline.load_corpora(cfg)
    _emit(pipeline.stats_of(corpora).to_csv(), args, "stats.csv")
    return 0


def cmd_plan(args) -> int:
    cfg = _config(args)
    corpora = pipeline.load_corpora(cfg)
    plan = pipeline.plan_of(pipeline.stats_of(corpora), cfg)
    for lang in plan.excluded:
        log.warning("%s has no words in %s and is left out of the plan", lang, cfg.plan_source)
    _emit(plan.to_csv(), args, "plan.csv")
    return 0


def cmd_translit(args) -> int:
    if args.lang:
        cfg = load_config(args.config) if args.config else PipelineConfig()
        table = language_table(LanguageTag.parse(args.lang), pipeline.load_tables(cfg))
        for line in sys.stdin:
            sys.stdout.write(romanize(line.rstrip("\n"), table) + "\n")
        return 0
    if not args.config:
        raise ConfigError("translit needs --lang or a config")
    cfg = _config(args)
    corpora = pipeline.load_corpora(cfg)
    result = pipeline.transliterate(corpora, cfg)
    out = cfg.out / "translit"
    out.mkdir(parents=True, exist_ok=True)
    by_lang: dict[str, list[str]] = {}
    for pair in result.pairs:
        by_lang.setdefault(str(pair.tgt.lang), []).append(f"{pair.src.text}\t{pair.tgt.text}\n")
    for tag, lines in sorted(by_lang.items()):
        (out / f"{tag}.tsv").write_text("".join(lines), encoding="utf-8")
    counts = Counter(str(p.tgt.lang) for p in result.pairs)
    print(json.dumps({"pairs": dict(sorted(counts.items())),
                      "skipped": dict(sorted(result.skipped.items()))}, ensure_ascii=False))
    return 0


def _train(cfg: PipelineConfig):
    corpora = pipeline.load_corpora(cfg)
    plan = pipeline.plan_of(pipeline.stats_of(corpora), cfg)
    sampled = pipeline.upsample(corpora, plan, cfg)
    translit = pipeline.transliterate(corpora, cfg)
    vocab = pipeline.train(pipeline.vocab_training_docs(sampled, corpora, translit), cfg)
    return corpora, translit, vocab


def cmd_train_vocab(args) -> int:
    cfg = _config(args)
    _, _, vocab = _train(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / "vocab.txt"
    vocab.save(path)
    print(f"wrote {len(vocab)} tokens to {path}")
    return 0


def cmd_tokenize(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    for line in sys.stdin:
        ids = tokenize(line, vocab)
        if args.pieces:
            print(" ".join(vocab.tokens[i] for i in ids))
        elif args.roundtrip:
            print(detokenize(ids, vocab))
        else:
            print(" ".join(map(str, ids)))
    return 0


def cmd_fertility(args) -> int:
    cfg = _config(args)
    corpora = pipeline.load_corpora(cfg)
    translit = pipeline.transliterate(corpora, cfg)
    vocab = Vocabulary.load(args.vocab) if args.vocab else _train(cfg)[2]
    report = pipeline.fertility_of(pipeline.fertility_docs(corpora, translit), vocab)
    for msg in report.warnings:
        log.warning(msg)
    _emit(report.to_csv(), args, "fertility.csv")
    return 0


def cmd_build(args) -> int:
    cfg = _config(args)
    manifest = pipeline.run_build(cfg)
    print(json.dumps(manifest, indent=2, ensure_ascii=False))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corpusforge", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p, required=True):
        p.add_argument("-c", "--config", required=required, help="pipeline INI file")
        p.add_argument("--seed", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--out", help="output directory (overrides [pipeline] out)")
        return p

    p = with_config(sub.add_parser("stats", help="per-language document/word/char counts (CSV)"))
    p.add_argument("--write", action="store_true", help="also write stats.csv to the output directory")
    p.set_defaults(func=cmd_stats)

    p = with_config(sub.add_parser("plan", help="upsampling multipliers (CSV)"))
    p.add_argument("--write", action="store_true", help="also write plan.csv to the output directory")
    p.set_defaults(func=cmd_plan)

    p = with_config(sub.add_parser("translit", help="romanize stdin (--lang) or the configured corpora"),
                    required=False)
    p.add_argument("--lang", help="romanize stdin lines using this language's table")
    p.set_defaults(func=cmd_translit)

    p = with_config(sub.add_parser("train-vocab", help="train and write vocab.txt"))
    p.set_defaults(func=cmd_train_vocab)

    p = sub.add_parser("tokenize", help="stdin text -> token ids on stdout")
    p.add_argument("--vocab", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--pieces", action="store_true", help="print token strings instead of ids")
    mode.add_argument("--roundtrip", action="store_true", help="print detokenized text")
    p.set_defaults(func=cmd_tokenize)

    p = with_config(sub.add_parser("fertility", help="subwords per word for each language (CSV)"))
    p.add_argument("--vocab", help="vocabulary file; trained from the config when omitted")
    p.add_argument("--write", action="store_true", help="also write fertility.csv to the output directory")
    p.set_defaults(func=cmd_fertility)

    p = with_config(sub.add_parser("build", help="run every stage and write all artifacts"))
    p.set_defaults(func=cmd_build)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MissingInputs as exc:
        print(f"error: stage inputs failed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, OSError) as exc:
        print(f"error: stage config failed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except ValueError as exc:
        print(f"error: stage {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
