import itertools
import sys
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

from ballotbox.profile import APPROVAL, RANKED, Profile

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def p0() -> Profile:
    return Profile.from_counts(3, {(0, 1, 2): 2, (2, 0, 1): 1})


@pytest.fixture
def P0():
    return p0()


@pytest.fixture
def data_dir():
    return DATA


@st.composite
def ranked_profiles(draw, min_m=2, max_m=4, min_n=1, max_n=8):
    m = draw(st.integers(min_m, max_m))
    perms = list(itertools.permutations(range(m)))
    votes = draw(st.lists(st.sampled_from(perms), min_size=min_n, max_size=max_n))
    return Profile.from_ballots(m, votes, RANKED)


@st.composite
def approval_profiles(draw, min_m=2, max_m=4, min_n=1, max_n=8):
    m = draw(st.integers(min_m, max_m))
    ballot = st.frozensets(st.integers(0, m - 1))
    votes = draw(st.lists(ballot, min_size=min_n, max_size=max_n))
    return Profile.from_ballots(m, votes, APPROVAL)


def all_ranked_profiles(m, n):
    """Every multiset of ``n`` rankings over ``m`` candidates."""
    perms = list(itertools.permutations(range(m)))
    for votes in itertools.combinations_with_replacement(perms, n):
        yield Profile.from_ballots(m, votes)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion in sorted(results):
        checks = results[criterion]
        ok = all(passed for _, passed, _ in checks)
        tr.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}")
        for label, passed, detail in checks:
            tr.write_line(f"    [{'pass' if passed else 'FAIL'}] {label}: {detail}")
