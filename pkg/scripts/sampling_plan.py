"""Upsampling multipliers for per-language token counts at several alphas.

    python scripts/sampling_plan.py                       # bundled Wikipedia magnitudes
    python scripts/sampling_plan.py counts.csv --alpha 0 0.3 1

Input is a CSV with columns ``lang,tokens``. Prints one row per language with
the multiplier and upsampled share of total tokens for each alpha.
"""

import argparse
import csv
import sys
from pathlib import Path

from corpusforge.corpus import LanguageTag
from corpusforge.sampler import build_plan

DEFAULT = Path(__file__).parent / "data" / "wikipedia_tokens.csv"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("counts", nargs="?", default=DEFAULT)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.0, 0.3, 0.7, 1.0])
    args = ap.parse_args(argv)

    with open(args.counts, newline="") as fh:
        counts = {LanguageTag.parse(r["lang"]): int(float(r["tokens"])) for r in csv.DictReader(fh)}
    plans = [build_plan(counts, a) for a in args.alpha]

    out = csv.writer(sys.stdout, lineterminator="\n")
    header = ["lang", "tokens"]
    for a in args.alpha:
        header += [f"m@{a:g}", f"share@{a:g}"]
    out.writerow(header)
    for lang in sorted(counts, key=lambda t: -counts[t]):
        row = [str(lang), counts[lang]]
        for plan in plans:
            e = plan[lang]
            row += [f"{e.multiplier:.3f}", f"{e.upsampled / plan.total_upsampled():.4f}"]
        out.writerow(row)


if __name__ == "__main__":
    main()
