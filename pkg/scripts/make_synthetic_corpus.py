"""Write a planted end-to-end corpus and optionally run ``atslens analyze`` on it.

    python scripts/make_synthetic_corpus.py OUT_DIR [--apps 50] [--seed 7] [--analyze]

The corpus directory gets ``truth.json`` with the expected manifest counts.
With ``--analyze`` the pipeline output goes to ``OUT_DIR/run`` and any count
that differs from the ground truth is reported.
"""

from __future__ import annotations

import argparse
import sys

from atslens.pipeline import PipelineConfig, cmd_analyze
from atslens.synthetic import synthetic_corpus


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--apps", type=int, default=50)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--analyze", action="store_true")
    args = ap.parse_args(argv)

    corpus = synthetic_corpus(args.out, n_apps=args.apps, seed=args.seed)
    print(f"corpus written to {args.out}")
    if not args.analyze:
        return 0
    cfg = PipelineConfig(
        flow_log_path=str(corpus.flow_log), abp_list_path=str(corpus.abp), hphosts_path=str(corpus.hphosts),
        external_snapshot_path=str(corpus.snapshot), evidence_fixture_dir=str(corpus.evidence_dir),
        web_presence_path=str(corpus.web_presence), output_dir=f"{args.out}/run")
    counts = cmd_analyze(cfg)["counts"]
    bad = 0
    for key, want in sorted(corpus.truth.items()):
        if key == "planted":
            continue
        got = counts.get(key)
        flag = "ok" if got == want else "MISMATCH"
        bad += got != want
        print(f"{key:24s} expected={want:<5} got={got!s:<5} {flag}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
