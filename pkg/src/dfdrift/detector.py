"""Bidirectional drift detection over an event stream.

Each event that brings a directly-follows relation unseen in the reference
window is a candidate drift point. A candidate is confirmed when a battery of
``2 * consecutive_tests`` window-pair G-tests, shifted around it, all show a
significant difference with the new relation over-represented in the
detection window. Removals of behaviour are found by running the same scan
over the reversed stream.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Optional, Union

from .events import EventLog, EventStream, Ordering, format_timestamp, reverse_stream, to_event_stream
from .stats import EmptyTableError, TestCache, TestOutcome, cached_test
from .window import DfRelation, WindowState

log = logging.getLogger(__name__)


class StreamTooShortError(ValueError):
    def __init__(self, length: int, minimum: int):
        super().__init__(f"stream has {length} events; at least {minimum} are required for this window")
        self.length = length
        self.minimum = minimum


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class DetectorConfig:
    window_size: int
    consecutive_tests: Optional[int] = None
    p_threshold: float = 0.05
    asr_threshold: float = 1.96
    ordering: Ordering = Ordering.TRACE_MAJOR

    def __post_init__(self):
        if self.consecutive_tests is None:
            object.__setattr__(self, "consecutive_tests", self.window_size // 2)
        object.__setattr__(self, "ordering", Ordering(self.ordering))
        if self.window_size < 2:
            raise ValueError(f"window_size must be >= 2, got {self.window_size}")
        if not 1 <= self.consecutive_tests <= self.window_size:
            raise ValueError(
                f"consecutive_tests must lie in [1, window_size], got {self.consecutive_tests}"
            )
        if not 0 < self.p_threshold < 1:
            raise ValueError("p_threshold must lie in (0, 1)")

    @property
    def min_stream_length(self) -> int:
        return 2 * self.window_size + self.consecutive_tests + 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ordering"] = self.ordering.value
        return d


@dataclass(frozen=True)
class DriftPoint:
    event_index: int
    trace_index: int
    direction: Direction
    trigger_relation: DfRelation
    battery_p_values: tuple[float, ...]
    timestamp: Optional[datetime] = None
    trace_id: Optional[str] = None
    merged_with: Optional["DriftPoint"] = None

    def to_dict(self) -> dict:
        d = {
            "event_index": self.event_index,
            "trace_index": self.trace_index,
            "trace_id": self.trace_id,
            "timestamp": format_timestamp(self.timestamp) or None,
            "direction": self.direction.value,
            "trigger_relation": [self.trigger_relation.source, self.trigger_relation.target],
            "p_values": list(self.battery_p_values),
        }
        if self.merged_with is not None:
            d["merged_with"] = self.merged_with.to_dict()
        return d


@dataclass
class DriftReport:
    points: list[DriftPoint]
    forward: list[DriftPoint]
    backward: list[DriftPoint]
    config: DetectorConfig
    stats: dict = field(default_factory=dict)

    @property
    def trace_indexes(self) -> list[int]:
        return [p.trace_index for p in self.points]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "points": [p.to_dict() for p in self.points],
            "forward": [p.to_dict() for p in self.forward],
            "backward": [p.to_dict() for p in self.backward],
            "stats": self.stats,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        out = io.StringIO(newline="")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["event_index", "trace_index", "trace_id", "timestamp", "direction", "trigger_relation", "min_p", "max_p"])
        for p in self.points:
            w.writerow([
                p.event_index, p.trace_index, p.trace_id or "", format_timestamp(p.timestamp),
                p.direction.value, str(p.trigger_relation),
                f"{min(p.battery_p_values):.6g}", f"{max(p.battery_p_values):.6g}",
            ])
        return out.getvalue()


# --------------------------------------------------------------------------

class _Battery:
    """Two probe windows reused across candidates so that consecutive test
    positions are reached by sliding instead of rebuilding."""

    def __init__(self, stream: EventStream, size: int):
        self.stream = stream
        self.size = size
        self._ref: Optional[WindowState] = None
        self._det: Optional[WindowState] = None

    def counts(self, which: str, start: int):
        attr = "_ref" if which == "ref" else "_det"
        w = getattr(self, attr)
        if w is None:
            w = WindowState(self.stream, start, self.size)
            setattr(self, attr, w)
        else:
            w.seek(start)
        return w.relation_counts


_DEGENERATE = TestOutcome(0.0, 0, 1.0, {}, degenerate=True)


def _outcome(cache: TestCache, key, battery: _Battery, ref_start: int) -> TestOutcome:
    size = battery.size
    try:
        return cached_test(
            cache, key,
            lambda: battery.counts("ref", ref_start),
            lambda: battery.counts("det", ref_start + size),
        )
    except EmptyTableError:
        cache.entries[key] = _DEGENERATE
        cache.computed += 1
        return _DEGENERATE


@dataclass
class CandidateResult:
    confirmed: bool
    p_values: list[float]
    out_of_bounds: bool = False


def validate_candidate(
    stream: EventStream,
    ref_start: int,
    relation: DfRelation,
    config: DetectorConfig,
    cache: TestCache,
    direction: Direction = Direction.FORWARD,
    _battery: Optional[_Battery] = None,
) -> CandidateResult:
    """Run the consecutive-test battery for a candidate peeked at
    ``ref_start + window_size``.

    Test ``i`` compares the windows starting at ``ref_start - c + i`` and
    ``ref_start - c + i + window_size``. The battery stops at the first test
    that fails, since confirmation needs all of them.
    """
    w, c = config.window_size, config.consecutive_tests
    first = ref_start - c
    if first < 0 or first + 2 * c - 1 + 2 * w > len(stream):
        return CandidateResult(False, [], out_of_bounds=True)
    battery = _battery or _Battery(stream, w)
    p_values = []
    for i in range(2 * c):
        s = first + i
        outcome = _outcome(cache, (direction.value, s), battery, s)
        p_values.append(outcome.p_value)
        if not outcome.significant(relation, config.p_threshold, config.asr_threshold):
            return CandidateResult(False, p_values)
    return CandidateResult(True, p_values)


def _scan(stream: EventStream, config: DetectorConfig, cache: TestCache, direction: Direction) -> list[DriftPoint]:
    w, c = config.window_size, config.consecutive_tests
    n = len(stream)
    if n < config.min_stream_length:
        raise StreamTooShortError(n, config.min_stream_length)
    window = WindowState(stream, 0, w)
    battery = _Battery(stream, w)
    points = []
    while window.start + 2 * w + c < n:
        e = window.end
        rel = window.peek_new_relation(e)
        if rel is not None and window.is_novel(rel):
            result = validate_candidate(stream, window.start, rel, config, cache, direction, battery)
            if result.confirmed:
                points.append(_make_point(stream, e, rel, result.p_values, direction))
                log.debug("%s drift at %d (%s)", direction.value, e, rel)
                window = WindowState(stream, e, w)
                continue
            window.exclude(rel)
        window.advance()
    return points


def _make_point(stream: EventStream, i: int, rel: DfRelation, p_values, direction: Direction) -> DriftPoint:
    fi = stream.forward_index(i)
    if stream.reversed:
        rel = rel.inverted()
    return DriftPoint(
        event_index=fi,
        trace_index=stream.trace_index[i],
        direction=direction,
        trigger_relation=rel,
        battery_p_values=tuple(p_values),
        timestamp=stream.timestamps[i],
        trace_id=stream.trace_ids[i],
    )


def detect_forward(stream: EventStream, config: DetectorConfig, cache: Optional[TestCache] = None) -> list[DriftPoint]:
    cache = TestCache() if cache is None else cache
    direction = Direction.BACKWARD if stream.reversed else Direction.FORWARD
    return _scan(stream, config, cache, direction)


def detect_backward(stream: EventStream, config: DetectorConfig, cache: Optional[TestCache] = None) -> list[DriftPoint]:
    """Scan the reversed stream; reported indexes are in forward coordinates."""
    cache = TestCache() if cache is None else cache
    points = _scan(reverse_stream(stream), config, cache, Direction.BACKWARD)
    return sorted(points, key=lambda p: p.event_index)


def merge_reports(forward: list[DriftPoint], backward: list[DriftPoint], window_size: int) -> list[DriftPoint]:
    """Combine both directions, collapsing each cross-direction pair closer
    than ``window_size`` events into its smaller-index point.

    Points are visited in index order; each is paired with the earliest
    still-unpaired point of the other direction within range. A point takes
    part in at most one pair, and same-direction points never collapse.
    """
    tagged = sorted(
        [(p.event_index, 0, p) for p in forward] + [(p.event_index, 1, p) for p in backward],
        key=lambda x: (x[0], x[1]),
    )
    kept: list[DriftPoint] = []
    paired: list[bool] = []
    for idx, _, p in tagged:
        for j, q in enumerate(kept):
            if paired[j] or q.direction == p.direction:
                continue
            if idx - q.event_index < window_size:
                kept[j] = replace(q, merged_with=p)
                paired[j] = True
                break
        else:
            kept.append(p)
            paired.append(False)
    return kept


def detect(data: Union[EventLog, EventStream], config: DetectorConfig) -> DriftReport:
    t0 = time.perf_counter()
    stream = to_event_stream(data, config.ordering) if isinstance(data, EventLog) else data
    t1 = time.perf_counter()
    fwd_cache, bwd_cache = TestCache(), TestCache()
    forward = detect_forward(stream, config, fwd_cache)
    t2 = time.perf_counter()
    backward = detect_backward(stream, config, bwd_cache)
    t3 = time.perf_counter()
    points = merge_reports(forward, backward, config.window_size)
    n = len(stream)
    total = t3 - t0
    stats = {
        "events": n,
        "seconds_total": total,
        "seconds_stream": t1 - t0,
        "seconds_forward": t2 - t1,
        "seconds_backward": t3 - t2,
        "ms_per_event": 1000.0 * total / n if n else 0.0,
        "events_per_second": n / total if total > 0 else float("inf"),
        "tests_forward": fwd_cache.computed,
        "tests_backward": bwd_cache.computed,
    }
    return DriftReport(points, forward, backward, config, stats)
