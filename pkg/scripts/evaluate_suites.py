#!/usr/bin/env python3
"""Run the synthetic evaluation suites and write per-run and per-pattern CSVs.

    python3 scripts/evaluate_suites.py --suite desk --noise 0 0.1 --seeds 10
    python3 scripts/evaluate_suites.py --suite desk-simple --window 150
"""

import argparse
import csv
import statistics
import sys
import time
from pathlib import Path

from dfdrift.detector import DetectorConfig
from dfdrift.synthlab import SUITES, run_suite


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--suite", choices=sorted(SUITES), default="desk")
    ap.add_argument("--window", type=int, default=150)
    ap.add_argument("--consecutive-tests", type=int)
    ap.add_argument("--noise", type=float, nargs="+", default=[0.0, 0.1])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--traces-per-segment", type=int, default=100)
    ap.add_argument("--segments", type=int, default=10)
    ap.add_argument("--et", type=int, nargs="+", default=[10, 50])
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args(argv)

    factory, patterns = SUITES[args.suite]
    config = DetectorConfig(args.window, args.consecutive_tests)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    runs, summary = [], []
    for noise in args.noise:
        t0 = time.perf_counter()
        results = run_suite(config, patterns, factory(), range(args.seeds), noise,
                            args.traces_per_segment, args.segments, args.et)
        print(f"noise {noise}: {len(results)} logs in {time.perf_counter() - t0:.0f}s", file=sys.stderr)
        for r in results:
            row = {"suite": args.suite, "pattern": r.pattern, "noise": noise, "seed": r.seed,
                   "events": r.events, "seconds": round(r.seconds, 3),
                   "detected": " ".join(map(str, r.detected))}
            for et in args.et:
                s = r.scores[et]
                row.update({f"tp_et{et}": s.tp, f"fp_et{et}": s.fp, f"fn_et{et}": s.fn,
                            f"precision_et{et}": round(s.precision, 4), f"recall_et{et}": round(s.recall, 4),
                            f"f_et{et}": round(s.f_score, 4)})
            runs.append(row)
        for name in [*patterns, "ALL"]:
            group = [r for r in results if name in ("ALL", r.pattern)]
            row = {"suite": args.suite, "pattern": name, "noise": noise, "logs": len(group)}
            for et in args.et:
                for m in ("precision", "recall", "f_score"):
                    row[f"{m}_et{et}"] = round(statistics.mean(getattr(r.scores[et], m) for r in group), 4)
            summary.append(row)

    for name, rows in (("runs", runs), ("summary", summary)):
        path = out / f"{args.suite}_{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {path}", file=sys.stderr)

    f_cols = [f"f_score_et{et}" for et in args.et]
    print(f"{'pattern':<24}{'noise':>6}" + "".join(f"{c:>14}" for c in f_cols))
    for row in summary:
        print(f"{row['pattern']:<24}{row['noise']:>6}" + "".join(f"{row[c]:>14.3f}" for c in f_cols))


if __name__ == "__main__":
    main()
