"""Drifted log generation and noise injection."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from ..events import Event, EventLog, Trace
from .model import Node, sample_trace, to_json_obj


@dataclass
class GroundTruth:
    drift_trace_indexes: list[int]
    segment_models: list[Node] = field(default_factory=list)
    segment_descriptions: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = self.drift_trace_indexes
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("drift indexes must be strictly increasing")

    def to_json(self) -> str:
        return json.dumps({
            "drift_trace_indexes": self.drift_trace_indexes,
            "segments": self.segment_descriptions,
            "segment_models": [to_json_obj(m) for m in self.segment_models],
            **self.extra,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        d = json.loads(text)
        known = {"drift_trace_indexes", "segments", "segment_models"}
        from .model import from_json_obj
        return cls(
            list(d["drift_trace_indexes"]),
            [from_json_obj(m) for m in d.get("segment_models", [])],
            list(d.get("segments", [])),
            {k: v for k, v in d.items() if k not in known},
        )


def generate_drift_log(
    segments: Sequence[Node],
    traces_per_segment: int,
    seed: int,
    descriptions: Sequence[str] = (),
) -> tuple[EventLog, GroundTruth]:
    """Concatenate ``traces_per_segment`` traces sampled from each model in
    turn; a sudden drift sits at the first trace of every segment after the
    first."""
    if len(segments) < 2:
        raise ValueError("need at least two segments to have a drift")
    if traces_per_segment < 1:
        raise ValueError("traces_per_segment must be positive")
    rng = random.Random(seed)
    sequences = [sample_trace(m, rng) for m in segments for _ in range(traces_per_segment)]
    log = EventLog.from_sequences(sequences)
    drifts = [i * traces_per_segment for i in range(1, len(segments))]
    return log, GroundTruth(drifts, list(segments), list(descriptions))


def inject_noise(
    log: EventLog,
    add_fraction: float,
    remove_fraction: float,
    seed: int,
    mode: str = "uniform",
) -> EventLog:
    """Randomly remove and then add events, leaving the traces themselves in place.

    ``floor(remove_fraction * n)`` events are removed uniformly without
    replacement, never emptying a trace. ``floor(add_fraction * n)`` events
    are then inserted at uniform positions of uniform traces. In ``uniform``
    mode the inserted activity is drawn from the log's alphabet; in
    ``duplicate`` mode it copies a random event of the same trace.
    """
    for f in (add_fraction, remove_fraction):
        if not 0 <= f < 1:
            raise ValueError(f"noise fractions must lie in [0, 1), got {f}")
    if mode not in ("uniform", "duplicate"):
        raise ValueError(f"unknown noise mode {mode!r}")
    rng = random.Random(seed)
    n = log.n_events
    n_remove, n_add = int(remove_fraction * n), int(add_fraction * n)
    traces = [list(t.events) for t in log.traces]

    if n_remove:
        positions = [(ti, ei) for ti, t in enumerate(traces) for ei in range(len(t))]
        rng.shuffle(positions)
        left = [len(t) for t in traces]
        doomed = set()
        for ti, ei in positions:
            if len(doomed) == n_remove:
                break
            if left[ti] > 1:
                doomed.add((ti, ei))
                left[ti] -= 1
        if len(doomed) < n_remove:
            raise ValueError(f"cannot remove {n_remove} events without emptying a trace")
        traces = [[e for ei, e in enumerate(t) if (ti, ei) not in doomed] for ti, t in enumerate(traces)]

    alphabet = log.alphabet()
    for _ in range(n_add):
        ti = rng.randrange(len(traces))
        t = traces[ti]
        pos = rng.randint(0, len(t))
        if mode == "uniform":
            activity = rng.choice(alphabet)
        else:
            activity = rng.choice(t).activity
        # borrow a neighbour's timestamp so within-trace order stays non-decreasing
        neighbour = t[pos - 1] if pos > 0 else (t[0] if t else None)
        ts = neighbour.timestamp if neighbour is not None else None
        t.insert(pos, Event(log.traces[ti].trace_id, activity, ts))

    return EventLog([Trace(src.trace_id, t) for src, t in zip(log.traces, traces)])
