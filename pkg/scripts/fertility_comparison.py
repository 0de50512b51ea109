"""Fertility of the configured vocabulary against an English-only one of equal size.

    python scripts/fertility_comparison.py [-c CONFIG] [--target N]

Defaults to the bundled mini-corpus. Both vocabularies carry every character
of the training sample, so the gap comes from the merges alone.
"""

import argparse
import csv
import sys
from dataclasses import replace
from importlib import resources

from corpusforge.config import load_config
from corpusforge.pipeline import english_baseline


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("-c", "--config", default=str(resources.files("corpusforge") / "data" / "mini" / "mini.ini"))
    ap.add_argument("--target", type=int, help="vocabulary size (overrides the config)")
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    if args.target:
        cfg = replace(cfg, vocab=replace(cfg.vocab, target_size=args.target))
    cmp = english_baseline(cfg)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["lang", "multilingual", "english_only", "ratio"])
    for lang, full, en in cmp.rows():
        out.writerow([str(lang), f"{full:.4f}", f"{en:.4f}", f"{en / full:.3f}"])
    print(f"# vocabulary sizes: multilingual {cmp.full_size}, english-only {cmp.english_size}", file=sys.stderr)


if __name__ == "__main__":
    main()
