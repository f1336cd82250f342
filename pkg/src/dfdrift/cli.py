"""Command-line front end: ``dfdrift {detect,generate,noise,evaluate}``.

Exit codes: 0 success, 1 usage error, 2 input error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .detector import DetectorConfig, StreamTooShortError, detect
from .events import LogError, Ordering, read_log, to_event_stream, write_log
from .synthlab.generate import GroundTruth, generate_drift_log, inject_noise
from .synthlab.model import ModelError, dump_model, load_model
from .synthlab.patterns import ChangePattern, apply_change_patterns
from .synthlab.scoring import score
from .synthlab.suites import SUITES, alternating_segments

log = logging.getLogger("dfdrift")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    subcommand: str
    argv: list[str]
    inputs: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    seed: Optional[int] = None
    outputs: list[str] = field(default_factory=list)
    version: str = __version__
    wall_clock_seconds: float = 0.0
    ms_per_event: Optional[float] = None

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 <= v < 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dfdrift", description="Process drift detection from event streams.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    d = sub.add_parser("detect", help="detect drift points in a log")
    d.add_argument("--input", required=True)
    d.add_argument("--format", choices=["xes", "csv"])
    d.add_argument("--ordering", choices=["trace", "timestamp"],
                   help="stream order (default: timestamp when every event has one, else trace)")
    _detector_flags(d)
    d.add_argument("--out-dir", default=".")

    g = sub.add_parser("generate", help="generate a drifted synthetic log")
    g.add_argument("--suite", choices=sorted(SUITES), default="desk")
    g.add_argument("--pattern", help="pattern name from the suite")
    g.add_argument("--model", help="JSON block-tree model file (overrides the suite model)")
    g.add_argument("--pattern-file", help="JSON file with a change pattern or a list of them")
    g.add_argument("--segments", type=_positive_int, default=10)
    g.add_argument("--traces-per-segment", type=_positive_int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=["xes", "csv"], default="csv")
    g.add_argument("--out-dir", required=True)

    n = sub.add_parser("noise", help="randomly add and remove events")
    n.add_argument("--input", required=True)
    n.add_argument("--format", choices=["xes", "csv"])
    n.add_argument("--add", type=_fraction, default=0.0)
    n.add_argument("--remove", type=_fraction, default=0.0)
    n.add_argument("--mode", choices=["uniform", "duplicate"], default="uniform")
    n.add_argument("--ground-truth", help="ground truth JSON to pass through")
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--out-dir", required=True)

    e = sub.add_parser("evaluate", help="detect and score a set of generated runs")
    e.add_argument("runs", nargs="*", help="directories holding a log and ground_truth.json")
    e.add_argument("--format", choices=["xes", "csv"])
    e.add_argument("--ordering", choices=["trace", "timestamp"], default="trace")
    _detector_flags(e)
    e.add_argument("--et", type=int, action="append", help="error tolerance in traces (repeatable)")
    e.add_argument("--out-dir", default=".")
    return p


def _detector_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", type=_positive_int, required=True)
    p.add_argument("--consecutive-tests", type=_positive_int)
    p.add_argument("--p-threshold", type=float, default=0.05)
    p.add_argument("--asr-threshold", type=float, default=1.96)


def _config(args, ordering: Ordering) -> DetectorConfig:
    try:
        return DetectorConfig(args.window, args.consecutive_tests, args.p_threshold, args.asr_threshold, ordering)
    except ValueError as exc:
        raise UsageError(str(exc))


def _read(path: str, fmt: Optional[str]):
    try:
        return read_log(path, fmt)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    except LogError as exc:
        raise InputError(f"{path}: {exc}")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _ordering(choice: Optional[str], event_log) -> Ordering:
    if choice == "trace":
        return Ordering.TRACE_MAJOR
    if choice == "timestamp":
        return Ordering.TIMESTAMP
    return Ordering.TIMESTAMP if event_log.n_events and event_log.has_timestamps() else Ordering.TRACE_MAJOR


def cmd_detect(args, argv) -> int:
    t0 = time.perf_counter()
    _config(args, Ordering.TRACE_MAJOR)  # reject bad flags before touching the input
    event_log = _read(args.input, args.format)
    config = _config(args, _ordering(args.ordering, event_log))
    try:
        stream = to_event_stream(event_log, config.ordering)
        report = detect(stream, config)
    except LogError as exc:
        raise InputError(str(exc))
    except StreamTooShortError as exc:
        raise InputError(f"{exc} (minimum {exc.minimum} events)")
    out = _out_dir(args.out_dir)
    report_json = report.to_dict()
    report_json["stats"] = {k: report.stats[k] for k in ("events", "tests_forward", "tests_backward")}
    (out / "report.json").write_text(json.dumps(report_json, indent=2) + "\n")
    (out / "report.csv").write_text(report.to_csv())
    elapsed = time.perf_counter() - t0
    ms = report.stats["ms_per_event"]
    RunManifest(
        "detect", argv, [args.input], config.to_dict(), None,
        [str(out / "report.json"), str(out / "report.csv")],
        wall_clock_seconds=elapsed, ms_per_event=ms,
    ).write(out)

    print(f"{len(report.points)} drift point(s) in {report.stats['events']} events")
    for p in report.points:
        ts = p.timestamp.isoformat() if p.timestamp else "-"
        print(f"  event {p.event_index:>8}  trace {p.trace_index:>6}  {ts}  {p.direction.value:<8}  {p.trigger_relation}")
    print(f"average {ms:.4f} ms/event")
    return EXIT_OK


def _load_json_file(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}")


def cmd_generate(args, argv) -> int:
    model_factory, patterns = SUITES[args.suite]
    try:
        model = load_model(Path(args.model).read_text()) if args.model else model_factory()
    except OSError as exc:
        raise InputError(f"cannot read {args.model}: {exc.strerror}")
    except (ModelError, ValueError) as exc:
        raise InputError(f"{args.model}: {exc}")

    if args.pattern_file:
        raw = _load_json_file(args.pattern_file)
        raw = raw if isinstance(raw, list) else [raw]
        try:
            change = [ChangePattern.from_dict(d) for d in raw]
        except (KeyError, ValueError) as exc:
            raise InputError(f"{args.pattern_file}: bad pattern ({exc})")
        name = "+".join(c.kind.value for c in change)
    elif args.pattern:
        if args.pattern not in patterns:
            raise UsageError(f"unknown pattern {args.pattern!r} for suite {args.suite}; choose from {sorted(patterns)}")
        change, name = patterns[args.pattern], args.pattern
    else:
        raise UsageError("give --pattern or --pattern-file")
    if args.segments < 2:
        raise UsageError("--segments must be at least 2")
    try:
        changed = apply_change_patterns(model, change)
    except ModelError as exc:
        raise InputError(str(exc))

    segments = alternating_segments(model, changed, args.segments)
    descriptions = ["base" if i % 2 == 0 else f"changed:{name}" for i in range(args.segments)]
    event_log, truth = generate_drift_log(segments, args.traces_per_segment, args.seed, descriptions)
    truth.extra.update({"pattern": name, "seed": args.seed, "noise": 0.0,
                        "changes": [c.to_dict() for c in change]})
    truth.segment_models = [model, changed]

    out = _out_dir(args.out_dir)
    log_path = out / f"log.{args.format}"
    write_log(event_log, str(log_path), args.format)
    (out / "ground_truth.json").write_text(truth.to_json() + "\n")
    (out / "model.json").write_text(dump_model(model) + "\n")
    RunManifest(
        "generate", argv, [args.model] if args.model else [],
        {"suite": args.suite, "pattern": name, "segments": args.segments,
         "traces_per_segment": args.traces_per_segment, "format": args.format},
        args.seed, [str(log_path), str(out / "ground_truth.json"), str(out / "model.json")],
    ).write(out)
    print(f"wrote {len(event_log)} traces, {event_log.n_events} events, drifts at {truth.drift_trace_indexes}")
    return EXIT_OK


def cmd_noise(args, argv) -> int:
    event_log = _read(args.input, args.format)
    fmt = args.format or ("csv" if args.input.lower().endswith(".csv") else "xes")
    try:
        noisy = inject_noise(event_log, args.add, args.remove, args.seed, args.mode)
    except ValueError as exc:
        raise InputError(str(exc))
    out = _out_dir(args.out_dir)
    log_path = out / f"log.{fmt}"
    write_log(noisy, str(log_path), fmt)
    outputs = [str(log_path)]
    inputs = [args.input]
    if args.ground_truth:
        truth = GroundTruth.from_json(Path(args.ground_truth).read_text())
        truth.extra["noise"] = {"add": args.add, "remove": args.remove, "mode": args.mode, "seed": args.seed}
        (out / "ground_truth.json").write_text(truth.to_json() + "\n")
        outputs.append(str(out / "ground_truth.json"))
        inputs.append(args.ground_truth)
    RunManifest(
        "noise", argv, inputs, {"add": args.add, "remove": args.remove, "mode": args.mode},
        args.seed, outputs,
    ).write(out)
    print(f"{event_log.n_events} -> {noisy.n_events} events in {len(noisy)} traces")
    return EXIT_OK


def _find_log(run_dir: Path, fmt: Optional[str]) -> Path:
    candidates = [run_dir / f"log.{fmt}"] if fmt else [run_dir / "log.csv", run_dir / "log.xes"]
    for c in candidates:
        if c.exists():
            return c
    raise InputError(f"no log file in {run_dir}")


def cmd_evaluate(args, argv) -> int:
    if not args.runs:
        raise UsageError("evaluate needs at least one run directory")
    ets = args.et or [10, 50]
    config = _config(args, _ordering(args.ordering, None))
    t0 = time.perf_counter()
    rows = []
    n_events = 0
    for run in args.runs:
        run_dir = Path(run)
        truth_path = run_dir / "ground_truth.json"
        if not truth_path.exists():
            raise InputError(f"{truth_path} not found")
        truth = GroundTruth.from_json(truth_path.read_text())
        log_path = _find_log(run_dir, args.format)
        event_log = _read(str(log_path), args.format)
        try:
            report = detect(to_event_stream(event_log, config.ordering), config)
        except StreamTooShortError as exc:
            raise InputError(f"{log_path}: {exc}")
        n_events += report.stats["events"]
        noise = truth.extra.get("noise", 0.0)
        if isinstance(noise, dict):
            noise = f"{noise.get('add', 0.0):g}/{noise.get('remove', 0.0):g}"
        else:
            noise = f"{noise:g}"
        row = {
            "pattern": truth.extra.get("pattern", "unknown"),
            "run": str(run_dir),
            "noise": noise,
            "detected": " ".join(map(str, report.trace_indexes)),
            "actual": " ".join(map(str, truth.drift_trace_indexes)),
        }
        for et in ets:
            s = score(report.trace_indexes, truth.drift_trace_indexes, et)
            row.update({f"precision_et{et}": s.precision, f"recall_et{et}": s.recall, f"f_et{et}": s.f_score})
        rows.append(row)

    metric_cols = [f"{m}_et{et}" for et in ets for m in ("precision", "recall", "f")]
    summary = []
    for pattern in sorted({r["pattern"] for r in rows}):
        group = [r for r in rows if r["pattern"] == pattern]
        summary.append(_mean_row(pattern, group, metric_cols))
    summary.append(_mean_row("ALL", rows, metric_cols))

    out = _out_dir(args.out_dir)
    path = out / "results.csv"
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["pattern", "run", "noise", "detected", "actual", *metric_cols],
                           lineterminator="\n")
        w.writeheader()
        for r in rows + summary:
            w.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in r.items()})
    elapsed = time.perf_counter() - t0
    RunManifest(
        "evaluate", argv, list(args.runs), {**config.to_dict(), "et": ets}, None, [str(path)],
        wall_clock_seconds=elapsed, ms_per_event=1000 * elapsed / n_events if n_events else None,
    ).write(out)
    for r in summary:
        print(r["pattern"], " ".join(f"{c}={r[c]:.3f}" for c in metric_cols))
    return EXIT_OK


def _mean_row(pattern: str, group: list[dict], cols: list[str]) -> dict:
    row = {"pattern": pattern, "run": "mean", "noise": "", "detected": "", "actual": ""}
    row.update({c: statistics.mean(r[c] for r in group) for c in cols})
    return row


COMMANDS = {"detect": cmd_detect, "generate": cmd_generate, "noise": cmd_noise, "evaluate": cmd_evaluate}


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"dfdrift: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(f"dfdrift: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"dfdrift: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
