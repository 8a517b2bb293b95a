from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ballotbox.profile import (
    APPROVAL, KindMismatch, Profile, ProfileError, ScoreVector, approval_scores,
    pairwise_tallies, positional_scores, restricted_plurality, top_k_counts,
)
from conftest import approval_profiles, ranked_profiles
import oracle


def test_p0_pairwise(P0):
    D = pairwise_tallies(P0).D
    assert (D[0][1], D[0][2], D[1][2]) == (3, 1, 1)


def test_pairwise_unanimous_and_split():
    assert pairwise_tallies(Profile.from_counts(2, {(0, 1): 7})).D[0][1] == 7
    assert pairwise_tallies(Profile.from_ballots(2, [(0, 1), (1, 0)])).D[0][1] == 0


def test_pairwise_rejects_approval():
    with pytest.raises(KindMismatch):
        pairwise_tallies(Profile.from_ballots(2, [{0}], APPROVAL))


def test_positional_examples(P0):
    assert positional_scores(P0, ScoreVector((2, 1, 0))) == {0: 5, 1: 2, 2: 2}
    assert positional_scores(P0, ScoreVector((1, 1, 0))) == {0: 3, 1: 2, 2: 1}
    with pytest.raises(ProfileError):
        positional_scores(P0, ScoreVector((1, 0)))


def test_approval_examples():
    prof = Profile.from_counts(3, {frozenset({0}): 4, frozenset({1}): 1}, APPROVAL)
    assert approval_scores(prof) == {0: 4, 1: 1, 2: 0}
    empty = Profile.from_counts(3, {frozenset(): 3}, APPROVAL)
    assert approval_scores(empty) == {0: 0, 1: 0, 2: 0}
    assert approval_scores(Profile.from_ballots(2, [{0, 1}], APPROVAL)) == {0: 1, 1: 1}


def test_top_k_examples(P0):
    assert top_k_counts(P0, 1) == {0: 2, 1: 0, 2: 1}
    assert top_k_counts(P0, 2) == {0: 3, 1: 2, 2: 1}
    assert top_k_counts(P0, 3) == {0: 3, 1: 3, 2: 3}
    with pytest.raises(ProfileError):
        top_k_counts(P0, 0)


def test_restricted_plurality_examples(P0):
    assert restricted_plurality(P0, {0, 2}) == {0: 2, 2: 1}
    assert restricted_plurality(P0, {1, 2}) == {1: 2, 2: 1}
    assert restricted_plurality(P0, {0, 1, 2}) == top_k_counts(P0, 1)
    with pytest.raises(ProfileError):
        restricted_plurality(P0, set())


def test_profile_validation():
    with pytest.raises(ProfileError):
        Profile.from_ballots(3, [(0, 0, 1)])
    with pytest.raises(ProfileError):
        Profile(3, "ranked", (((0, 1, 2), 0),))
    with pytest.raises(ProfileError, match="no ballots"):
        Profile.from_ballots(3, [])
    with pytest.raises(ProfileError):
        Profile.from_ballots(2, [{0, 5}], APPROVAL)
    with pytest.raises(ProfileError):
        Profile.from_ballots(2, [(0, 1)], names=("a", "a"))


def test_score_vector_canonical_form():
    assert ScoreVector((3, 2, 1)).normalized == (1, Fraction(1, 2), 0)
    assert ScoreVector((3, 2, 1)) == ScoreVector.borda(3)
    with pytest.raises(ProfileError):
        ScoreVector((1, 2, 0))
    with pytest.raises(ProfileError):
        ScoreVector((1, 1))
    with pytest.raises(ProfileError):
        ScoreVector.k_approval(3, 3)


@given(ranked_profiles(), st.randoms())
def test_anonymity(prof, rnd):
    votes = prof.expanded()
    rnd.shuffle(votes)
    assert Profile.from_ballots(prof.m, votes) == prof


@given(ranked_profiles())
def test_conservation(prof):
    m, n = prof.m, prof.n
    assert sum(top_k_counts(prof, 1).values()) == n
    for k in range(1, m + 1):
        assert sum(top_k_counts(prof, k).values()) == k * n
    assert sum(positional_scores(prof, ScoreVector.borda(m)).values()) == n * m * (m - 1) // 2


@given(ranked_profiles())
def test_pairwise_matches_oracle(prof):
    t = pairwise_tallies(prof)
    ref = oracle.pairwise(prof.expanded(), prof.m)
    assert [list(r) for r in t.D] == ref
    for x in range(prof.m):
        assert t.N[x][x] == 0
        for y in range(prof.m):
            assert t.D[x][y] == -t.D[y][x]
            assert abs(t.D[x][y]) <= prof.n
            if x != y:
                assert t.N[x][y] + t.N[y][x] == prof.n


@given(ranked_profiles())
def test_top_k_monotone(prof):
    prev = dict.fromkeys(range(prof.m), 0)
    for k in range(1, prof.m + 1):
        cur = top_k_counts(prof, k)
        assert all(cur[x] >= prev[x] for x in cur)
        prev = cur
    assert all(v == prof.n for v in prev.values())


@given(ranked_profiles(max_m=4))
def test_restricted_plurality_sums_to_n(prof):
    m = prof.m
    for mask in range(1, 2**m):
        alive = {c for c in range(m) if mask >> c & 1}
        s = restricted_plurality(prof, alive)
        assert sum(s.values()) == prof.n
        assert s == oracle.plurality_among(prof.expanded(), alive)


@given(approval_profiles())
def test_approval_scores_match_count(prof):
    votes = prof.expanded()
    assert approval_scores(prof) == {x: sum(x in v for v in votes) for x in range(prof.m)}


@given(ranked_profiles(), st.integers(1, 5))
def test_scaled_and_relabeled(prof, c):
    assert prof.scaled(c).n == c * prof.n
    perm = list(range(prof.m))[::-1]
    back = prof.relabeled(perm).relabeled(perm)
    assert back == prof
