"""Fertility and script composition as the vocabulary grows.

    python scripts/vocab_scaling.py [-c CONFIG] [--sizes 400 800 1600]

Trains one vocabulary per size on the configured sample and prints, per
size, the fertility of each language and the share of each script.
"""

import argparse
import csv
import sys
from dataclasses import replace
from importlib import resources

from corpusforge import pipeline
from corpusforge.config import load_config
from corpusforge.vocab import script_composition


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("-c", "--config", default=str(resources.files("corpusforge") / "data" / "mini" / "mini.ini"))
    ap.add_argument("--sizes", type=int, nargs="+", default=[400, 800, 1600, 3200])
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    corpora = pipeline.load_corpora(cfg)
    plan = pipeline.plan_of(pipeline.stats_of(corpora), cfg)
    sampled = pipeline.upsample(corpora, plan, cfg)
    translit = pipeline.transliterate(corpora, cfg)
    train_docs = pipeline.vocab_training_docs(sampled, corpora, translit)
    eval_docs = pipeline.fertility_docs(corpora, translit)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["size", "kind", "key", "value"])
    for size in args.sizes:
        vocab = pipeline.train(train_docs, replace(cfg, vocab=replace(cfg.vocab, target_size=size)))
        report = pipeline.fertility_of(eval_docs, vocab)
        for lang in sorted(report.counts, key=str):
            out.writerow([len(vocab), "fertility", str(lang), f"{report.fertility(lang):.4f}"])
        comp = script_composition(vocab)
        for cat, n in comp.counts.items():
            if n:
                out.writerow([len(vocab), "script_percent", cat, f"{comp.percent(cat):.2f}"])


if __name__ == "__main__":
    main()
