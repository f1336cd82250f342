from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence


@dataclass(frozen=True)
class ScoreResult:
    tp: int
    fp: int
    fn: int
    matching: tuple[tuple[int, int], ...] = field(default=())

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f_score(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def score(detected: Sequence[int], actual: Sequence[int], et: int) -> ScoreResult:
    """Match detections to true drifts within ``[t - et, t + et]``.

    Detections are taken in ascending order; each claims the nearest
    unclaimed true drift in range (the smaller one on a tie).
    """
    if et < 0:
        raise ValueError("error tolerance must be non-negative")
    free = sorted(actual)
    matching = []
    for t in sorted(detected):
        best = None
        for a in free:
            d = abs(a - t)
            if d <= et and (best is None or d < abs(best - t)):
                best = a
        if best is not None:
            free.remove(best)
            matching.append((t, best))
    tp = len(matching)
    return ScoreResult(tp, len(detected) - tp, len(actual) - tp, tuple(matching))
