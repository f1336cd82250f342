import itertools
import json
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfdrift.events import EventLog
from dfdrift.synthlab import (
    PRESETS, Activity, ChangePattern, Choice, GroundTruth, Loop, ModelError, Parallel,
    PatternKind, Sequence, Skip, UndetectablePatternError, apply_change_pattern,
    apply_change_patterns, base_model, df_difference, df_relations, dump_model,
    generate_drift_log, inject_noise, language, load_model, opt, par, sample_trace, score, seq, xor,
)
from dfdrift.synthlab.model import df_of_traces, is_acyclic
from dfdrift.synthlab.patterns import CATEGORY, load_pattern

# ---------------------------------------------------------------- strategies

_shapes = st.recursive(
    st.just("leaf"),
    lambda kids: st.one_of(
        st.tuples(st.sampled_from(["seq", "xor", "par"]), st.lists(kids, min_size=1, max_size=3)),
        st.tuples(st.just("loop"), kids),
        st.tuples(st.just("opt"), kids),
    ),
    max_leaves=6,
)


def _build(shape, names):
    if shape == "leaf":
        return Activity(next(names))
    kind, body = shape
    if kind == "loop":
        return Loop(_build(body, names), 0.3)
    if kind == "opt":
        return Skip(_build(body, names), 0.4)
    kids = tuple(_build(k, names) for k in body)
    if kind == "seq":
        return Sequence(kids)
    if kind == "xor":
        return Choice(kids, tuple([1 / len(kids)] * len(kids)))
    return Parallel(kids)


models = _shapes.map(lambda s: _build(s, iter("ABCDEFGHIJKLMNOP")))
acyclic_models = models.filter(is_acyclic)


# ---------------------------------------------------------------- models

class TestSampling:
    def test_sequence(self):
        rng = random.Random(0)
        assert {tuple(sample_trace(seq("A", "B", "C"), rng)) for _ in range(50)} == {("A", "B", "C")}

    def test_parallel_frequencies(self):
        rng = random.Random(11)
        counts = Counter(tuple(sample_trace(par("A", "B"), rng)) for _ in range(10_000))
        assert set(counts) == language(par("A", "B")) == {("A", "B"), ("B", "A")}
        for t in counts:
            assert abs(counts[t] / 10_000 - 0.5) <= 0.05

    def test_parallel_uniform_over_interleavings(self):
        m = par(seq("A", "B"), seq("C", "D"))
        rng = random.Random(2)
        counts = Counter(tuple(sample_trace(m, rng)) for _ in range(12_000))
        assert set(counts) == language(m) and len(counts) == 6
        assert all(abs(c / 12_000 - 1 / 6) < 0.02 for c in counts.values())

    def test_skip_always(self):
        rng = random.Random(0)
        assert all(sample_trace(seq("X", opt("A", skip=1.0)), rng) == ["X"] for _ in range(50))

    def test_choice_weights(self):
        rng = random.Random(5)
        counts = Counter(sample_trace(xor("A", "B", probs=[0.8, 0.2]), rng)[0] for _ in range(5000))
        assert abs(counts["A"] / 5000 - 0.8) < 0.03

    def test_loop_geometric(self):
        rng = random.Random(8)
        lengths = [len(sample_trace(Loop(Activity("A"), 0.5), rng)) for _ in range(5000)]
        assert abs(sum(lengths) / 5000 - 2.0) < 0.1

    def test_invalid_models(self):
        with pytest.raises(ModelError):
            xor("A", "B", probs=[0.5, 0.6])
        with pytest.raises(ModelError):
            Loop(Activity("A"), 1.0)
        with pytest.raises(ModelError):
            apply_change_pattern(seq("A", "B"), ChangePattern(PatternKind.SERIAL_INSERT, (1,), ("A",)))

    @settings(max_examples=40)
    @given(acyclic_models, st.integers(0, 2**16))
    def test_samples_within_language(self, m, seed):
        lang = language(m)
        rng = random.Random(seed)
        for _ in range(30):
            assert tuple(sample_trace(m, rng)) in lang

    @settings(max_examples=60)
    @given(models)
    def test_structural_df_matches_enumeration(self, m):
        assert df_relations(m) == df_of_traces(language(m, loop_unroll=2))

    @given(models)
    def test_json_round_trip(self, m):
        assert load_model(dump_model(m)) == m


# ---------------------------------------------------------------- patterns

def enumerated_df(m):
    return df_of_traces(language(m))


class TestPatterns:
    def test_serial_insert(self):
        m = seq("A", "B")
        new = apply_change_pattern(m, ChangePattern(PatternKind.SERIAL_INSERT, (1,), ("X",)))
        assert language(new) == {("A", "X", "B")}
        added, removed = df_difference(m, new)
        assert added == {("A", "X"), ("X", "B")} and removed == {("A", "B")}

    def test_sequentialize_parallel(self):
        m = seq("A", par("E", "F"), "G")
        new = apply_change_pattern(m, ChangePattern(PatternKind.SEQUENTIALIZE_PARALLEL, (1,)))
        added, removed = df_difference(m, new)
        assert added == set()
        assert removed == {("F", "E"), ("A", "F"), ("E", "G")}
        assert language(new) == {("A", "E", "F", "G")}

    def test_remove_optional_block(self):
        m = seq("A", opt("B"), "C")
        new = apply_change_pattern(m, ChangePattern(PatternKind.REMOVE_FRAGMENT, (1,)))
        added, removed = df_difference(m, new)
        assert added == set()
        assert removed == enumerated_df(m) - enumerated_df(new) == {("A", "B"), ("B", "C")}

    def test_undetectable(self):
        # a parallel block of one child is already a sequence
        with pytest.raises(UndetectablePatternError):
            apply_change_pattern(seq("A", par("B"), "C"), ChangePattern(PatternKind.SEQUENTIALIZE_PARALLEL, (1,)))
        # a fragment skipped with probability 0 is never skipped
        with pytest.raises(UndetectablePatternError):
            apply_change_pattern(seq("A", "B"), ChangePattern(PatternKind.SKIP_FRAGMENT, (1,), probability=0.0))

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_change_df_relations(self, name):
        m = base_model()
        new = apply_change_pattern(m, PRESETS[name])
        assert enumerated_df(new) != enumerated_df(m)
        assert df_relations(new) == enumerated_df(new)

    def test_categories(self):
        assert set(CATEGORY) == set(PatternKind)
        assert set(CATEGORY.values()) == {"I", "R", "O"}

    def test_composite(self):
        m = seq("A", "B", "C", "D")
        new = apply_change_patterns(m, [
            ChangePattern(PatternKind.SERIAL_INSERT, (1,), ("X",)),
            ChangePattern(PatternKind.SWAP_FRAGMENTS, (2,), second=3),
        ])
        assert language(new) == {("A", "X", "C", "B", "D")}

    def test_pattern_json(self):
        p = ChangePattern(PatternKind.LOOP_FRAGMENT, (2, 0), probability=0.25)
        assert load_pattern(json.dumps(p.to_dict())) == p

    def test_bad_target(self):
        with pytest.raises(ModelError):
            apply_change_pattern(seq("A", "B"), ChangePattern(PatternKind.REMOVE_FRAGMENT, (5,)))


# ---------------------------------------------------------------- generation

class TestGenerate:
    def test_two_segments(self):
        log, truth = generate_drift_log([seq("A"), seq("B")], 500, 0)
        assert truth.drift_trace_indexes == [500]
        assert len(log) == 1000

    def test_ten_segments(self):
        _, truth = generate_drift_log([seq("A"), seq("B")] * 5, 100, 0)
        assert truth.drift_trace_indexes == list(range(100, 1000, 100))

    def test_segments_follow_models(self):
        log, _ = generate_drift_log([seq("A", "B"), seq("C")], 3, 0)
        assert [t.activities for t in log.traces] == [["A", "B"]] * 3 + [["C"]] * 3

    def test_seed_determinism(self):
        segs = [base_model(), apply_change_pattern(base_model(), PRESETS["swap_fragments"])]
        assert generate_drift_log(segs, 50, 3)[0] == generate_drift_log(segs, 50, 3)[0]
        assert generate_drift_log(segs, 50, 3)[0] != generate_drift_log(segs, 50, 4)[0]

    def test_needs_two_segments(self):
        with pytest.raises(ValueError):
            generate_drift_log([seq("A")], 10, 0)

    def test_ground_truth_json(self):
        _, truth = generate_drift_log([seq("A"), seq("B")], 5, 0, ["before", "after"])
        truth.extra["seed"] = 0
        assert GroundTruth.from_json(truth.to_json()) == truth


def _log(n_traces=1000, seed=0):
    return generate_drift_log([base_model(), seq("P", "Q")], n_traces // 2, seed)[0]


class TestNoise:
    def test_identity(self):
        log = _log()
        assert inject_noise(log, 0, 0, 1) == log

    def test_counts(self):
        log = generate_drift_log([seq("A", "B", "C", "D", "E")] * 2, 1000, 0)[0]
        assert log.n_events == 10_000
        noisy = inject_noise(log, 0.1, 0.1, 5)
        assert noisy.n_events == 10_000
        removed = inserted = 0
        for before, after in zip(log.traces, noisy.traces):
            a = Counter(before.activities)
            b = Counter(after.activities)
            removed += sum((a - b).values())
            inserted += sum((b - a).values())
        # per-trace multiset differences can only under-count, never over-count
        assert removed <= 1000 and inserted <= 1000
        assert removed >= 900 and inserted >= 900

    def test_one_sided_counts(self):
        # removing then adding: with no insertions, exactly floor(f * n) events go
        log = _log()
        n = log.n_events
        assert inject_noise(log, 0.0, 0.2, 1).n_events == n - int(0.2 * n)
        assert inject_noise(log, 0.3, 0.0, 1).n_events == n + int(0.3 * n)

    @settings(max_examples=25)
    @given(st.floats(0, 0.9), st.floats(0, 0.6), st.integers(0, 1000), st.sampled_from(["uniform", "duplicate"]))
    def test_traces_preserved(self, add, remove, seed, mode):
        log = _log(60, seed)
        noisy = inject_noise(log, add, remove, seed, mode)
        assert [t.trace_id for t in noisy.traces] == [t.trace_id for t in log.traces]
        assert all(len(t) > 0 for t in noisy.traces)
        assert set(noisy.alphabet()) <= set(log.alphabet())

    def test_impossible_removal(self):
        log = EventLog.from_sequences([["A"], ["B"]])
        with pytest.raises(ValueError):
            inject_noise(log, 0, 0.5, 0)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            inject_noise(_log(), 1.0, 0, 0)
        with pytest.raises(ValueError):
            inject_noise(_log(), 0.1, 0, 0, mode="bogus")

    def test_deterministic(self):
        assert inject_noise(_log(), 0.1, 0.1, 2) == inject_noise(_log(), 0.1, 0.1, 2)


# ---------------------------------------------------------------- scoring

def optimal_tp(detected, actual, et):
    """Maximum one-to-one matching by brute force."""
    best = 0
    pairs = [(d, a) for d in detected for a in actual if abs(d - a) <= et]
    for r in range(len(pairs), 0, -1):
        for combo in itertools.combinations(pairs, r):
            ds, as_ = [d for d, _ in combo], [a for _, a in combo]
            if len(set(ds)) == r and len(set(as_)) == r:
                return r
    return best


class TestScore:
    def test_perfect(self):
        r = score([100, 200], [100, 200], 0)
        assert (r.precision, r.recall, r.f_score) == (1.0, 1.0, 1.0)

    def test_interval(self):
        r = score([505], [500], 10)
        assert r.tp == 1 and r.f_score == 1.0
        r = score([505], [500], 3)
        assert (r.tp, r.fp, r.fn, r.f_score) == (0, 1, 1, 0.0)

    def test_boundary_inclusive(self):
        assert score([510], [500], 10).tp == 1

    def test_one_to_one(self):
        r = score([495, 505], [500], 10)
        assert (r.tp, r.fp, r.fn) == (1, 1, 0)
        assert r.tp == optimal_tp([495, 505], [500], 10)

    def test_empty(self):
        r = score([], [], 10)
        assert (r.precision, r.recall, r.f_score) == (0.0, 0.0, 0.0)

    def test_negative_et(self):
        with pytest.raises(ValueError):
            score([1], [1], -1)

    @given(
        st.lists(st.integers(0, 2000), unique=True, max_size=10),
        st.lists(st.integers(0, 2000), unique=True, max_size=10),
        st.integers(0, 100), st.integers(-500, 500),
    )
    def test_invariants(self, detected, actual, et, shift):
        r = score(detected, actual, et)
        assert r.tp + r.fn == len(actual) and r.tp + r.fp == len(detected)
        moved = score([d + shift for d in detected], [a + shift for a in actual], et)
        assert (moved.tp, moved.fp, moved.fn) == (r.tp, r.fp, r.fn)

    @given(
        st.lists(st.integers(0, 30), unique=True, min_size=1, max_size=5),
        st.lists(st.integers(-12, 12), min_size=5, max_size=5),
        st.integers(0, 10),
    )
    def test_greedy_optimal_when_drifts_separated(self, slots, offsets, et):
        # true drifts 100 apart, detections near them: the instances the suites produce
        actual = [100 * s for s in slots]
        detected = sorted({a + o for a, o in zip(actual, offsets)})
        assert score(detected, actual, et).tp == optimal_tp(detected, actual, et)
