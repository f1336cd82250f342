"""Ready-made evaluation suites: models, change patterns, and a runner that
generates, optionally noises, detects and scores."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from ..detector import DetectorConfig, detect
from .generate import generate_drift_log, inject_noise
from .model import Node, base_model, seq, xor
from .patterns import PRESETS, ChangePattern, PatternKind, apply_change_patterns
from .scoring import ScoreResult, score


def desk_model() -> Node:
    """Compact model with about five events per trace."""
    return seq("A", xor("B", "C"), "D", "E", xor("F", "G"))


# Changes for the desk model. Each triggering relation appears in every
# post-drift trace, which a 150-event window needs for the consecutive
# tests to have enough power.
DESK_PATTERNS: dict[str, list[ChangePattern]] = {
    "serial_insert": [ChangePattern(PatternKind.SERIAL_INSERT, (3,), ("X",))],
    "remove_fragment": [ChangePattern(PatternKind.REMOVE_FRAGMENT, (3,))],
    "swap_fragments": [ChangePattern(PatternKind.SWAP_FRAGMENTS, (2,), second=3)],
    "IRO": [
        ChangePattern(PatternKind.SERIAL_INSERT, (3,), ("X",)),
        ChangePattern(PatternKind.SWAP_FRAGMENTS, (1,), second=2),
        ChangePattern(PatternKind.SKIP_FRAGMENT, (4,), probability=0.5),
    ],
    "ORI": [
        ChangePattern(PatternKind.SKIP_FRAGMENT, (2,), probability=0.5),
        ChangePattern(PatternKind.SWAP_FRAGMENTS, (3,), second=4),
        ChangePattern(PatternKind.SERIAL_INSERT, (1,), ("X",)),
    ],
}

# One pattern per kind for the desk model, including those whose new
# relations fire only on some traces.
DESK_SIMPLE: dict[str, list[ChangePattern]] = {
    "serial_insert": DESK_PATTERNS["serial_insert"],
    "remove_fragment": DESK_PATTERNS["remove_fragment"],
    "swap_fragments": DESK_PATTERNS["swap_fragments"],
    "conditional_insert": [ChangePattern(PatternKind.CONDITIONAL_INSERT, (3,), ("X",))],
    "parallel_insert": [ChangePattern(PatternKind.PARALLEL_INSERT, (3,), ("X",))],
    "loop_fragment": [ChangePattern(PatternKind.LOOP_FRAGMENT, (3,), probability=0.3)],
    "skip_fragment": [ChangePattern(PatternKind.SKIP_FRAGMENT, (3,), probability=0.5)],
    "parallelize_sequence": [ChangePattern(PatternKind.PARALLELIZE_SEQUENCE, (2,), second=3)],
}

SUITES: dict[str, tuple[Callable[[], Node], dict[str, list[ChangePattern]]]] = {
    "desk": (desk_model, DESK_PATTERNS),
    "desk-simple": (desk_model, DESK_SIMPLE),
    "base": (base_model, {k: [v] for k, v in PRESETS.items()}),
}


def alternating_segments(base: Node, changed: Node, n_segments: int = 10) -> list[Node]:
    return [base if i % 2 == 0 else changed for i in range(n_segments)]


@dataclass
class RunResult:
    pattern: str
    seed: int
    noise: float
    detected: list[int]
    actual: list[int]
    scores: dict[int, ScoreResult] = field(default_factory=dict)
    seconds: float = 0.0
    events: int = 0


def run_suite(
    config: DetectorConfig,
    patterns: dict[str, list[ChangePattern]],
    model: Optional[Node] = None,
    seeds: Iterable[int] = (0, 1),
    noise: float = 0.0,
    traces_per_segment: int = 100,
    n_segments: int = 10,
    ets: Iterable[int] = (10, 50),
) -> list[RunResult]:
    model = desk_model() if model is None else model
    ets = list(ets)
    results = []
    for name, change in patterns.items():
        changed = apply_change_patterns(model, change)
        for seed in seeds:
            log, truth = generate_drift_log(
                alternating_segments(model, changed, n_segments), traces_per_segment, seed
            )
            if noise:
                log = inject_noise(log, noise, noise, seed + 10_000)
            report = detect(log, config)
            detected = report.trace_indexes
            results.append(RunResult(
                name, seed, noise, detected, truth.drift_trace_indexes,
                {et: score(detected, truth.drift_trace_indexes, et) for et in ets},
                report.stats["seconds_total"], report.stats["events"],
            ))
    return results


def summarize(results: list[RunResult], et: int) -> dict[str, float]:
    scores = [r.scores[et] for r in results]
    return {
        "f_score": statistics.mean(s.f_score for s in scores),
        "precision": statistics.mean(s.precision for s in scores),
        "recall": statistics.mean(s.recall for s in scores),
        "tp": sum(s.tp for s in scores),
        "fp": sum(s.fp for s in scores),
        "fn": sum(s.fn for s in scores),
    }
