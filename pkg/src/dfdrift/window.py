"""Sliding reference window with an incrementally maintained multiset of
directly-follows relations.

A relation occurrence counts only when both of its events lie inside the
window, so ``relation_counts`` is always a pure function of the slice
``[start, start + size)``.
"""

from __future__ import annotations

from collections import Counter, deque
from typing import NamedTuple, Optional

from .events import EventStream


class DfRelation(NamedTuple):
    source: str
    target: str

    def inverted(self) -> "DfRelation":
        return DfRelation(self.target, self.source)

    def __str__(self) -> str:
        return f"{self.source}>{self.target}"


class WindowError(ValueError):
    pass


def extract_df_relations(stream: EventStream, start: int = 0, stop: Optional[int] = None) -> Counter:
    """Count directly-follows relations of the events in ``stream[start:stop]``."""
    stop = len(stream) if stop is None else stop
    last: dict[str, str] = {}
    counts: Counter = Counter()
    trace_ids, activities = stream.trace_ids, stream.activities
    for i in range(start, stop):
        tid, act = trace_ids[i], activities[i]
        prev = last.get(tid)
        if prev is not None:
            counts[DfRelation(prev, act)] += 1
        last[tid] = act
    return counts


class WindowState:
    """Reference window over ``stream`` covering ``[start, start + size)``.

    Per trace, the in-window events are kept as a deque of
    ``(stream_index, activity)`` pairs; its tail is the trace's most recent
    in-window event. Advancing is O(1).
    """

    def __init__(self, stream: EventStream, start: int, size: int):
        if size < 1:
            raise WindowError(f"window size must be positive, got {size}")
        if start < 0 or start + size > len(stream):
            raise WindowError(
                f"window [{start}, {start + size}) exceeds stream of length {len(stream)}"
            )
        self.stream = stream
        self.start = start
        self.size = size
        self.relation_counts: Counter = Counter()
        self.excluded: set[DfRelation] = set()
        self._traces: dict[str, deque] = {}
        for i in range(start, start + size):
            self._enter(i)

    def __repr__(self) -> str:
        return f"WindowState(start={self.start}, size={self.size}, types={len(self.relation_counts)})"

    @property
    def end(self) -> int:
        return self.start + self.size

    @property
    def per_trace_last(self) -> dict[str, tuple[str, int]]:
        return {tid: (q[-1][1], q[-1][0]) for tid, q in self._traces.items()}

    def _enter(self, i: int) -> None:
        tid = self.stream.trace_ids[i]
        act = self.stream.activities[i]
        q = self._traces.get(tid)
        if q is None:
            self._traces[tid] = deque([(i, act)])
        else:
            self.relation_counts[DfRelation(q[-1][1], act)] += 1
            q.append((i, act))

    def _leave(self, i: int) -> None:
        tid = self.stream.trace_ids[i]
        q = self._traces[tid]
        _, act = q.popleft()
        if q:
            rel = DfRelation(act, q[0][1])
            left = self.relation_counts[rel] - 1
            if left:
                self.relation_counts[rel] = left
            else:
                del self.relation_counts[rel]
        else:
            del self._traces[tid]

    def advance(self) -> None:
        """Slide the window forward by one event."""
        if self.end >= len(self.stream):
            raise WindowError("cannot advance past the end of the stream")
        self._leave(self.start)
        self._enter(self.end)
        self.start += 1
        if self.excluded:
            # an excluded type whose occurrences all slid out is no longer tracked
            self.excluded = {r for r in self.excluded if r in self.relation_counts}

    def seek(self, start: int) -> None:
        """Reposition the window, sliding when that is cheaper than a rebuild."""
        if start == self.start:
            return
        if self.start < start < self.end and start + self.size <= len(self.stream):
            while self.start < start:
                self.advance()
            return
        self.__init__(self.stream, start, self.size)

    def peek_new_relation(self, index: Optional[int] = None) -> Optional[DfRelation]:
        """Relation formed by the event at ``index`` (default: the event just
        after the window) with its trace's most recent in-window event."""
        index = self.end if index is None else index
        q = self._traces.get(self.stream.trace_ids[index])
        if q is None:
            return None
        return DfRelation(q[-1][1], self.stream.activities[index])

    def is_novel(self, rel: DfRelation) -> bool:
        return rel in self.excluded or rel not in self.relation_counts

    def exclude(self, rel: DfRelation) -> None:
        """Treat ``rel`` as unseen while the window still holds occurrences of it."""
        self.excluded.add(rel)

    def check(self) -> bool:
        """Compare against a from-scratch extraction; for tests and debugging."""
        return self.relation_counts == extract_df_relations(self.stream, self.start, self.end)


def window_init(stream: EventStream, start: int, size: int) -> WindowState:
    return WindowState(stream, start, size)


def window_advance(w: WindowState) -> WindowState:
    w.advance()
    return w


def peek_new_relation(w: WindowState) -> Optional[DfRelation]:
    return w.peek_new_relation()


def is_novel(w: WindowState, rel: DfRelation) -> bool:
    return w.is_novel(rel)


def exclude_relation(w: WindowState, rel: DfRelation) -> WindowState:
    w.exclude(rel)
    return w
