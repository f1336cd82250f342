"""Synthetic logs with known drifts, noise injection, and scoring."""

from .generate import GroundTruth, generate_drift_log, inject_noise
from .model import (
    Activity, Choice, Loop, ModelError, Parallel, Sequence, Skip,
    base_model, df_relations, dump_model, language, load_model, opt, par, sample_trace, seq, xor, loop,
)
from .patterns import (
    PRESETS, ChangePattern, PatternKind, UndetectablePatternError, apply_change_pattern,
    apply_change_patterns, df_difference,
)
from .scoring import ScoreResult, score
from .suites import DESK_PATTERNS, DESK_SIMPLE, SUITES, desk_model, run_suite, summarize

__all__ = [
    "GroundTruth",
    "generate_drift_log",
    "inject_noise",
    "Activity",
    "Choice",
    "Loop",
    "ModelError",
    "Parallel",
    "Sequence",
    "Skip",
    "base_model",
    "df_relations",
    "dump_model",
    "language",
    "load_model",
    "opt",
    "par",
    "sample_trace",
    "seq",
    "xor",
    "loop",
    "PRESETS",
    "ChangePattern",
    "PatternKind",
    "UndetectablePatternError",
    "apply_change_pattern",
    "apply_change_patterns",
    "df_difference",
    "ScoreResult",
    "score",
    "DESK_PATTERNS",
    "DESK_SIMPLE",
    "SUITES",
    "desk_model",
    "run_suite",
    "summarize",
]
