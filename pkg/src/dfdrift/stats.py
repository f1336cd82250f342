"""G-test of independence and adjusted standardized residuals on 2 x k
tables of directly-follows relation frequencies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Optional, Sequence

from scipy.special import gammaincc


class EmptyTableError(ValueError):
    pass


@dataclass(frozen=True)
class ContingencyTable:
    """Row 0 holds reference-window counts, row 1 detection-window counts."""

    columns: tuple
    counts: tuple[tuple[int, ...], tuple[int, ...]]

    def __post_init__(self):
        if not self.columns:
            raise EmptyTableError("contingency table needs at least one column")
        if len(self.counts) != 2 or any(len(r) != len(self.columns) for r in self.counts):
            raise ValueError("counts must be a 2 x k matrix matching the columns")
        if any(c < 0 for r in self.counts for c in r):
            raise ValueError("negative count")
        if any(t == 0 for t in self.col_totals):
            raise ValueError("zero-total column")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], columns: Optional[Sequence] = None) -> "ContingencyTable":
        k = len(rows[0])
        return cls(tuple(columns) if columns is not None else tuple(range(k)),
                   (tuple(rows[0]), tuple(rows[1])))

    @property
    def k(self) -> int:
        return len(self.columns)

    @property
    def row_totals(self) -> tuple[int, int]:
        return sum(self.counts[0]), sum(self.counts[1])

    @property
    def col_totals(self) -> tuple[int, ...]:
        return tuple(a + b for a, b in zip(*self.counts))

    @property
    def grand_total(self) -> int:
        return sum(self.row_totals)


def build_contingency(ref_counts: Mapping[Hashable, int], det_counts: Mapping[Hashable, int]) -> ContingencyTable:
    columns = sorted(
        r for r in set(ref_counts) | set(det_counts)
        if ref_counts.get(r, 0) + det_counts.get(r, 0) > 0
    )
    if not columns:
        raise EmptyTableError("both windows are empty; nothing to compare")
    return ContingencyTable(
        tuple(columns),
        (tuple(ref_counts.get(r, 0) for r in columns), tuple(det_counts.get(r, 0) for r in columns)),
    )


def g_statistic(t: ContingencyTable) -> tuple[float, int]:
    """Likelihood-ratio statistic ``2 * sum O ln(O/E)`` and its degrees of freedom.

    Cells with O = 0 contribute nothing. No Williams or continuity correction.
    """
    n = t.grand_total
    g = 0.0
    for row, rt in zip(t.counts, t.row_totals):
        for o, ct in zip(row, t.col_totals):
            if o:
                g += o * math.log(o * n / (rt * ct))
    return max(2.0 * g, 0.0), t.k - 1


def chi_square_sf(x: float, df: int) -> float:
    """P(X > x) for X ~ chi-square(df), via the regularized upper incomplete gamma."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def asr(t: ContingencyTable, col: int, row: int = 1) -> float:
    """Adjusted standardized residual of one cell; 0.0 for a degenerate cell
    (its row or column holds every observation)."""
    value, _ = asr_with_flag(t, col, row)
    return value


def asr_with_flag(t: ContingencyTable, col: int, row: int = 1) -> tuple[float, bool]:
    """ASR together with a flag marking a degenerate cell."""
    n = t.grand_total
    rt = t.row_totals[row]
    ct = t.col_totals[col]
    expected = rt * ct / n
    var = expected * (1 - rt / n) * (1 - ct / n)
    if var <= 0:
        return 0.0, True
    return (t.counts[row][col] - expected) / math.sqrt(var), False


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # keep pytest from collecting this

    g_statistic: float
    degrees_of_freedom: int
    p_value: float
    asr_by_type: Mapping[Hashable, float]
    degenerate: bool = False

    def significant(self, relation: Hashable, p_threshold: float = 0.05, asr_threshold: float = 1.96) -> bool:
        return (
            not self.degenerate
            and self.p_value < p_threshold
            and self.asr_by_type.get(relation, 0.0) > asr_threshold
        )


def g_test(ref_counts: Mapping[Hashable, int], det_counts: Mapping[Hashable, int]) -> TestOutcome:
    """Run the G-test and compute detection-row ASRs for every column.

    A table with a single column has no degrees of freedom; it is reported as
    a degenerate outcome with p = 1 so that it can never pass.
    """
    t = build_contingency(ref_counts, det_counts)
    g, df = g_statistic(t)
    if df < 1:
        return TestOutcome(g, df, 1.0, {}, degenerate=True)
    asrs = {c: asr(t, j, 1) for j, c in enumerate(t.columns)}
    return TestOutcome(g, df, chi_square_sf(g, df), asrs)


@dataclass
class TestCache:
    """Outcomes keyed by ``(direction, reference-window start)``.

    ``computed`` counts real computations; a stored outcome is never replaced.
    """

    __test__ = False

    entries: dict = field(default_factory=dict)
    computed: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key) -> bool:
        return key in self.entries

    def get(self, key) -> Optional[TestOutcome]:
        return self.entries.get(key)


def cached_test(cache: TestCache, key, ref_counts, det_counts) -> TestOutcome:
    """Return the outcome stored under ``key``, computing it on first use.

    ``ref_counts`` and ``det_counts`` may be zero-argument callables so that
    the window counts are only materialised on a cache miss.
    """
    hit = cache.entries.get(key)
    if hit is not None:
        return hit
    if callable(ref_counts):
        ref_counts = ref_counts()
    if callable(det_counts):
        det_counts = det_counts()
    outcome = g_test(ref_counts, det_counts)
    cache.entries[key] = outcome
    cache.computed += 1
    return outcome
