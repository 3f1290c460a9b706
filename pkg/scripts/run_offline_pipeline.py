#!/usr/bin/env python3
"""Run the whole pipeline offline: extract, group, summarize, evaluate, stats.

Summaries come from the extractive fallback, so no endpoint or API key is
needed.  Point it at any corpus directory, e.g. the one produced by
make_demo_corpus.py:

    python3 scripts/make_demo_corpus.py --out-dir demo_corpus
    python3 scripts/run_offline_pipeline.py --corpus-dir demo_corpus
"""

import argparse
import json
import sys
from pathlib import Path

from quotesum.cli import main as quotesum


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--corpus-dir", type=Path, required=True)
    parser.add_argument("--out-dir", type=Path, default=Path("out"))
    parser.add_argument("--jobs", type=int, default=None)
    args = parser.parse_args(argv)

    base = ["--corpus-dir", str(args.corpus_dir), "--out-dir", str(args.out_dir)]
    if args.jobs is not None:
        base += ["--jobs", str(args.jobs)]

    stages = (
        ["extract", *base],
        ["group", *base],
        ["summarize", "--fallback", *base],
        ["evaluate", *base],
        ["stats", *base],
    )
    for stage in stages:
        print(f"==> quotesum {' '.join(stage)}", file=sys.stderr)
        rc = quotesum(stage)
        if rc != 0:
            print(f"stage {stage[0]!r} failed with exit code {rc}",
                  file=sys.stderr)
            return rc

    report = json.loads((args.out_dir / "report.json").read_text())
    agg = report["aggregate"]
    print(f"scored {report['n_scored']}/{report['n_examples']} examples")
    for key in ("rouge1_f1", "rouge2_f1", "rougeL_f1", "mint",
                "entity_precision"):
        if key in agg:
            print(f"  {key}: {agg[key]:.4f}")
    print(f"outputs in {args.out_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
