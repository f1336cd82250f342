#!/usr/bin/env python3
"""Per-event processing time on drift-free streams of growing length.

    python3 scripts/throughput.py --events 100000 300000 1000000 --window 1500
"""

import argparse
import random
import time
import tracemalloc

from dfdrift.detector import DetectorConfig, detect, detect_forward
from dfdrift.events import EventLog, to_event_stream
from dfdrift.stats import TestCache
from dfdrift.synthlab import base_model, sample_trace


def drift_free_stream(n_events, seed):
    rng = random.Random(seed)
    m = base_model()
    seqs, n = [], 0
    while n < n_events:
        t = sample_trace(m, rng)
        seqs.append(t)
        n += len(t)
    return to_event_stream(EventLog.from_sequences(seqs))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--events", type=int, nargs="+", default=[100_000, 300_000, 1_000_000])
    ap.add_argument("--window", type=int, default=1500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--memory", action="store_true", help="also trace peak scan memory (slower)")
    args = ap.parse_args(argv)

    config = DetectorConfig(args.window)
    print(f"{'events':>10}{'ms/event':>10}{'events/s':>12}{'tests':>7}{'points':>7}{'peak MB':>9}")
    for n in args.events:
        stream = drift_free_stream(n, args.seed)
        t0 = time.perf_counter()
        report = detect(stream, config)
        elapsed = time.perf_counter() - t0
        tests = report.stats["tests_forward"] + report.stats["tests_backward"]
        peak = ""
        if args.memory:
            tracemalloc.start()
            detect_forward(stream, config, TestCache())
            peak = f"{tracemalloc.get_traced_memory()[1] / 1e6:.2f}"
            tracemalloc.stop()
        print(f"{len(stream):>10}{1000 * elapsed / len(stream):>10.4f}{len(stream) / elapsed:>12.0f}"
              f"{tests:>7}{len(report.points):>7}{peak:>9}")


if __name__ == "__main__":
    main()
