import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dfdrift.events import EventStream

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def streams(draw, max_events=300, max_traces=8, max_alphabet=5, min_events=0):
    """Arbitrary interleavings of a few traces over a small alphabet."""
    n_traces = draw(st.integers(1, max_traces))
    alphabet = [chr(ord("A") + i) for i in range(draw(st.integers(1, max_alphabet)))]
    pairs = draw(st.lists(
        st.tuples(st.integers(0, n_traces - 1), st.sampled_from(alphabet)),
        min_size=min_events, max_size=max_events,
    ))
    return EventStream([f"t{t}" for t, _ in pairs], [a for _, a in pairs])


def random_stream(rng, n_events, n_traces, alphabet_size):
    alphabet = [f"a{i}" for i in range(alphabet_size)]
    tids = [f"t{rng.randrange(n_traces)}" for _ in range(n_events)]
    acts = [rng.choice(alphabet) for _ in range(n_events)]
    return EventStream(tids, acts)


# ---------------------------------------------------------------- acceptance report

import pytest  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


class Criterion:
    def __init__(self, title):
        self.title = title
        self.detail = ""


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


@pytest.fixture
def criterion(request):
    """Records one pass/fail line per acceptance criterion."""
    c = Criterion(request.node.name)
    yield c
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    line = f"{status}  {c.title}" + (f"  [{c.detail}]" if c.detail else "")
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
