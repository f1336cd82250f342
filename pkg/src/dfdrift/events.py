"""Event logs, event streams, and the XES/CSV readers and writers.

An :class:`EventLog` is an ordered collection of traces. Detection never
works on the log directly; it consumes an :class:`EventStream`, a flat,
indexed sequence built with :func:`to_event_stream`.
"""

from __future__ import annotations

import csv
import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterator, Optional, Sequence
from xml.sax.saxutils import quoteattr


class LogError(ValueError):
    """Base class for problems with event log input."""


class ParseError(LogError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ConfigError(LogError):
    pass


class Ordering(str, Enum):
    TRACE_MAJOR = "trace_major"
    TIMESTAMP = "timestamp"


@dataclass(frozen=True)
class Event:
    trace_id: str
    activity: str
    timestamp: Optional[datetime] = None
    stream_index: int = -1


@dataclass
class Trace:
    trace_id: str
    events: list[Event] = field(default_factory=list)

    @property
    def activities(self) -> list[str]:
        return [e.activity for e in self.events]

    def __len__(self) -> int:
        return len(self.events)


@dataclass
class EventLog:
    traces: list[Trace] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.traces)

    @property
    def n_events(self) -> int:
        return sum(len(t) for t in self.traces)

    def alphabet(self) -> list[str]:
        return sorted({e.activity for t in self.traces for e in t.events})

    def has_timestamps(self) -> bool:
        return all(e.timestamp is not None for t in self.traces for e in t.events)

    @classmethod
    def from_sequences(cls, sequences: Sequence[Sequence[str]], prefix: str = "t") -> "EventLog":
        """Build a timestamp-free log from activity sequences, one per trace."""
        traces = []
        for i, seq in enumerate(sequences):
            tid = f"{prefix}{i}"
            traces.append(Trace(tid, [Event(tid, a) for a in seq]))
        return cls(traces)


class EventStream:
    """An immutable, indexed sequence of events.

    Stored column-wise: ``trace_ids[i]``, ``activities[i]``, ``timestamps[i]``
    and ``trace_index[i]`` (position of the event's trace in the source log)
    describe the event at stream index ``i``. The event at index ``i`` of a
    reversed stream is the event at forward index ``n - 1 - i``.
    """

    __slots__ = ("trace_ids", "activities", "timestamps", "trace_index", "ordering", "reversed")

    def __init__(
        self,
        trace_ids: Sequence[str],
        activities: Sequence[str],
        timestamps: Optional[Sequence[Optional[datetime]]] = None,
        trace_index: Optional[Sequence[int]] = None,
        ordering: Ordering = Ordering.TRACE_MAJOR,
        reversed: bool = False,
    ):
        n = len(trace_ids)
        if len(activities) != n:
            raise ValueError("trace_ids and activities differ in length")
        self.trace_ids = tuple(trace_ids)
        self.activities = tuple(activities)
        self.timestamps = tuple(timestamps) if timestamps is not None else (None,) * n
        if trace_index is None:
            seen: dict[str, int] = {}
            trace_index = [seen.setdefault(t, len(seen)) for t in self.trace_ids]
        self.trace_index = tuple(trace_index)
        self.ordering = Ordering(ordering)
        self.reversed = reversed

    def __len__(self) -> int:
        return len(self.activities)

    def __getitem__(self, i: int) -> Event:
        if i < 0:
            i += len(self)
        return Event(self.trace_ids[i], self.activities[i], self.timestamps[i], i)

    def __iter__(self) -> Iterator[Event]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.trace_ids == other.trace_ids
            and self.activities == other.activities
            and self.timestamps == other.timestamps
            and self.trace_index == other.trace_index
            and self.reversed == other.reversed
        )

    def __repr__(self) -> str:
        return f"EventStream(n={len(self)}, ordering={self.ordering.value}, reversed={self.reversed})"

    def forward_index(self, i: int) -> int:
        """Map an index of this stream to forward-stream coordinates."""
        return len(self) - 1 - i if self.reversed else i

    @classmethod
    def from_sequences(cls, sequences: Sequence[Sequence[str]]) -> "EventStream":
        return to_event_stream(EventLog.from_sequences(sequences))


def to_event_stream(log: EventLog, ordering: Ordering | str = Ordering.TRACE_MAJOR) -> EventStream:
    ordering = Ordering(ordering)
    keyed = []
    for ti, trace in enumerate(log.traces):
        for pos, e in enumerate(trace.events):
            keyed.append((ti, pos, e))
    if ordering is Ordering.TIMESTAMP:
        missing = [e for _, _, e in keyed if e.timestamp is None]
        if missing:
            raise LogError(
                f"timestamp ordering requested but {len(missing)} event(s) lack a timestamp "
                f"(first in trace {missing[0].trace_id!r})"
            )
        keyed.sort(key=lambda k: (_sort_key(k[2].timestamp), k[0], k[1]))
    return EventStream(
        [e.trace_id for _, _, e in keyed],
        [e.activity for _, _, e in keyed],
        [e.timestamp for _, _, e in keyed],
        [ti for ti, _, _ in keyed],
        ordering=ordering,
    )


def _sort_key(ts: datetime) -> float:
    # naive timestamps are read as UTC so mixed logs still sort
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.timestamp()


def reverse_stream(s: EventStream) -> EventStream:
    return EventStream(
        s.trace_ids[::-1],
        s.activities[::-1],
        s.timestamps[::-1],
        s.trace_index[::-1],
        ordering=s.ordering,
        reversed=not s.reversed,
    )


def stream_to_log(s: EventStream) -> EventLog:
    """Regroup a stream into traces, ordered by first appearance."""
    traces: dict[str, Trace] = {}
    for e in s:
        trace = traces.setdefault(e.trace_id, Trace(e.trace_id))
        trace.events.append(Event(e.trace_id, e.activity, e.timestamp))
    return EventLog(list(traces.values()))


def split_log(
    log: EventLog, boundary: int, ordering: Ordering | str = Ordering.TRACE_MAJOR
) -> tuple[EventLog, EventLog]:
    """Cut ``log`` at a stream index.

    A trace goes to the first log when at least half of its events have a
    stream index below ``boundary``, otherwise to the second.
    """
    stream = to_event_stream(log, ordering)
    n = len(stream)
    if not 0 <= boundary <= n:
        raise LogError(f"boundary {boundary} outside [0, {n}]")
    left_counts = [0] * len(log.traces)
    for i in range(boundary):
        left_counts[stream.trace_index[i]] += 1
    first, second = EventLog(), EventLog()
    for ti, trace in enumerate(log.traces):
        if len(trace) == 0:
            (first if boundary > 0 else second).traces.append(trace)
        elif 2 * left_counts[ti] >= len(trace):
            first.traces.append(trace)
        else:
            second.traces.append(trace)
    return first, second


# --------------------------------------------------------------------------
# timestamps

def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp, accepting a trailing ``Z`` and any
    number of fractional-second digits."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    if "." in s:
        head, _, rest = s.partition(".")
        digits = ""
        while rest and rest[0].isdigit():
            digits, rest = digits + rest[0], rest[1:]
        s = f"{head}.{(digits + '000000')[:6]}{rest}"
    return datetime.fromisoformat(s)


def format_timestamp(ts: Optional[datetime]) -> str:
    if ts is None:
        return ""
    return ts.isoformat(timespec="milliseconds")


# --------------------------------------------------------------------------
# XES

def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attributes(elem: ET.Element) -> dict[str, str]:
    out = {}
    for child in elem:
        key = child.get("key")
        if key is not None and _local(child.tag) in ("string", "date", "id", "int", "float", "boolean"):
            out[key] = child.get("value", "")
    return out


def parse_xes(data: bytes) -> EventLog:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XES: {exc}", line, col) from exc
    if _local(root.tag) != "log":
        raise ParseError(f"expected <log> root element, found <{_local(root.tag)}>")
    log = EventLog()
    seen: set[str] = set()
    for ti, trace_elem in enumerate(el for el in root if _local(el.tag) == "trace"):
        tid = _attributes(trace_elem).get("concept:name", str(ti))
        if tid in seen:
            raise ParseError(f"duplicate trace id {tid!r}")
        seen.add(tid)
        trace = Trace(tid)
        for ei, ev_elem in enumerate(el for el in trace_elem if _local(el.tag) == "event"):
            attrs = _attributes(ev_elem)
            activity = attrs.get("concept:name")
            if not activity:
                raise ParseError(f"event {ei} of trace {tid!r} has no concept:name")
            ts = attrs.get("time:timestamp")
            try:
                timestamp = parse_timestamp(ts) if ts else None
            except ValueError as exc:
                raise ParseError(f"bad timestamp {ts!r} in trace {tid!r}") from exc
            trace.events.append(Event(tid, activity, timestamp))
        log.traces.append(trace)
    return log


def write_xes(log: EventLog) -> bytes:
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write('<log xes.version="1.0" xmlns="http://www.xes-standard.org/">\n')
    for trace in log.traces:
        out.write("  <trace>\n")
        out.write(f'    <string key="concept:name" value={quoteattr(trace.trace_id)}/>\n')
        for e in trace.events:
            out.write("    <event>\n")
            out.write(f'      <string key="concept:name" value={quoteattr(e.activity)}/>\n')
            if e.timestamp is not None:
                out.write(f'      <date key="time:timestamp" value="{format_timestamp(e.timestamp)}"/>\n')
            out.write("    </event>\n")
        out.write("  </trace>\n")
    out.write("</log>\n")
    return out.getvalue().encode("utf-8")


# --------------------------------------------------------------------------
# CSV

@dataclass(frozen=True)
class ColumnMapping:
    trace_id: str = "case_id"
    activity: str = "activity"
    timestamp: Optional[str] = "timestamp"


def parse_csv(data: bytes, mapping: ColumnMapping = ColumnMapping()) -> EventLog:
    reader = csv.DictReader(io.StringIO(data.decode("utf-8-sig"), newline=""))
    header = reader.fieldnames or []
    for col in (mapping.trace_id, mapping.activity):
        if col not in header:
            raise ConfigError(f"column {col!r} not found in CSV header {header}")
    # timestamps are optional; a log without the column simply has none
    ts_col = mapping.timestamp if mapping.timestamp in header else None
    traces: dict[str, Trace] = {}
    for row_no, row in enumerate(reader, start=2):
        tid = row[mapping.trace_id]
        activity = row[mapping.activity]
        if not tid:
            raise ParseError(f"row {row_no}: empty trace id")
        if not activity:
            raise ParseError(f"row {row_no}: empty activity")
        timestamp = None
        if ts_col is not None and row[ts_col]:
            try:
                timestamp = parse_timestamp(row[ts_col])
            except ValueError as exc:
                raise ParseError(f"row {row_no}: unparseable timestamp {row[ts_col]!r}") from exc
        trace = traces.setdefault(tid, Trace(tid))
        trace.events.append(Event(tid, activity, timestamp))
    return EventLog(list(traces.values()))


def write_csv(log: EventLog, mapping: ColumnMapping = ColumnMapping()) -> bytes:
    out = io.StringIO(newline="")
    writer = csv.writer(out, lineterminator="\n")
    ts_col = mapping.timestamp or "timestamp"
    writer.writerow([mapping.trace_id, mapping.activity, ts_col])
    for trace in log.traces:
        for e in trace.events:
            writer.writerow([trace.trace_id, e.activity, format_timestamp(e.timestamp)])
    return out.getvalue().encode("utf-8")


def read_log(path: str, fmt: Optional[str] = None) -> EventLog:
    """Read a log from disk; the format is inferred from the suffix unless given."""
    fmt = fmt or ("csv" if str(path).lower().endswith(".csv") else "xes")
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt == "csv":
        return parse_csv(data)
    if fmt == "xes":
        return parse_xes(data)
    raise ConfigError(f"unknown log format {fmt!r}")


def write_log(log: EventLog, path: str, fmt: Optional[str] = None) -> None:
    fmt = fmt or ("csv" if str(path).lower().endswith(".csv") else "xes")
    payload = write_csv(log) if fmt == "csv" else write_xes(log)
    with open(path, "wb") as fh:
        fh.write(payload)
