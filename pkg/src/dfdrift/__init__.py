"""Process drift detection on event streams using directly-follows relations."""

from .detector import (
    DetectorConfig, DriftPoint, DriftReport, Direction, StreamTooShortError,
    detect, detect_backward, detect_forward, merge_reports, validate_candidate,
)
from .events import (
    Event, EventLog, EventStream, Ordering, Trace,
    parse_csv, parse_xes, read_log, reverse_stream, split_log, to_event_stream, write_csv, write_log, write_xes,
)
from .stats import TestCache, asr, build_contingency, cached_test, chi_square_sf, g_statistic
from .window import DfRelation, WindowState, extract_df_relations

__version__ = "0.1.0"

__all__ = [
    "DetectorConfig",
    "DriftPoint",
    "DriftReport",
    "Direction",
    "StreamTooShortError",
    "detect",
    "detect_backward",
    "detect_forward",
    "merge_reports",
    "validate_candidate",
    "Event",
    "EventLog",
    "EventStream",
    "Ordering",
    "Trace",
    "parse_csv",
    "parse_xes",
    "read_log",
    "reverse_stream",
    "split_log",
    "to_event_stream",
    "write_csv",
    "write_log",
    "write_xes",
    "TestCache",
    "asr",
    "build_contingency",
    "cached_test",
    "chi_square_sf",
    "g_statistic",
    "DfRelation",
    "WindowState",
    "extract_df_relations",
]
