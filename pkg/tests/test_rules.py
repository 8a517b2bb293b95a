from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ballotbox.profile import APPROVAL, KindMismatch, Profile, ProfileError, ScoreVector
from ballotbox.rules import (
    BORDA, BUCKLIN, MAXIMIN, PLURALITY, RULE_NAMES, RUNOFF, STV, RuleError, RuleSpec,
    condorcet_winner, co_winners, evaluate_rule, parse_rule, score_table, winner,
)
from conftest import all_ranked_profiles, ranked_profiles
import oracle

RANKED_RULES = [
    RuleSpec(PLURALITY), RuleSpec.k_approval(1), RuleSpec(BORDA), RuleSpec(MAXIMIN),
    RuleSpec.copeland(0), RuleSpec.copeland(Fraction(1, 2)), RuleSpec.copeland(1),
    RuleSpec(BUCKLIN), RuleSpec(RUNOFF), RuleSpec(STV),
]


def oracle_winner(prof, rule):
    return oracle.winner(prof.expanded(), prof.m, rule.name, k=rule.k, alpha=rule.alpha)


def test_p0_examples(P0):
    r = evaluate_rule(P0, RuleSpec(PLURALITY))
    assert (r.winner, r.scores) == (0, {0: 2, 1: 0, 2: 1})
    r = evaluate_rule(P0, RuleSpec(MAXIMIN))
    assert (r.winner, r.scores) == (0, {0: 1, 1: -3, 2: -1})
    r = evaluate_rule(P0, RuleSpec.copeland())
    assert (r.winner, r.scores) == (0, {0: 2, 1: 1, 2: 0})
    r = evaluate_rule(P0, RuleSpec(BUCKLIN))
    assert r.winner == 0 and r.scores[0] == 1
    r = evaluate_rule(P0, RuleSpec(STV))
    assert r.winner == 0
    assert [e.chosen for e in r.trace if e.action == "eliminate"] == [1, 2]
    r = evaluate_rule(P0, RuleSpec(RUNOFF))
    assert r.winner == 0
    assert next(e for e in r.trace if e.action == "finalists").candidates == (0, 2)


def test_approval_example():
    prof = Profile.from_counts(3, {frozenset({0}): 4, frozenset({1}): 1}, APPROVAL)
    assert evaluate_rule(prof, parse_rule("approval")).winner == 0


def test_score_table(P0):
    assert score_table(P0, RuleSpec(PLURALITY)) == {0: 2, 1: 0, 2: 1}
    assert score_table(P0, RuleSpec(MAXIMIN)) == {0: 1, 1: -3, 2: -1}


def test_condorcet_examples(P0):
    assert condorcet_winner(P0) == 0
    cycle = Profile.from_ballots(3, [(0, 1, 2), (1, 2, 0), (2, 0, 1)])
    assert condorcet_winner(cycle) is None
    assert condorcet_winner(Profile.from_counts(3, {(2, 1, 0): 4})) == 2


def test_errors(P0):
    with pytest.raises(KindMismatch):
        evaluate_rule(P0, parse_rule("approval"))
    with pytest.raises(ProfileError):
        evaluate_rule(P0, RuleSpec.k_approval(3))
    with pytest.raises(RuleError):
        parse_rule("kemeny")
    with pytest.raises(RuleError):
        parse_rule("copeland:2")
    with pytest.raises(RuleError):
        parse_rule("plurality:3")


def test_parse_rule_round_trip():
    for text in ["plurality", "kapproval:3", "borda", "copeland:1/2", "copeland:0", "stv", "runoff"]:
        assert str(parse_rule(text)) == text
    assert parse_rule("scoring:3,1,0").vector == ScoreVector((1, Fraction(1, 3), 0))


def test_tie_break_is_lowest_index():
    tied = Profile.from_ballots(2, [(0, 1), (1, 0)])
    for rule in RANKED_RULES:
        if rule.name != STV:
            assert evaluate_rule(tied, rule).winner == 0
    # STV eliminates the lowest index among the weakest
    assert evaluate_rule(tied, RuleSpec(STV)).winner == 1
    flipped = Profile.from_ballots(3, [(2, 1, 0), (1, 2, 0)])
    assert evaluate_rule(flipped, RuleSpec(PLURALITY)).winner == 1


def test_co_winners_and_priority():
    tied = Profile.from_ballots(2, [(0, 1), (1, 0)])
    assert winner(tied, RuleSpec(PLURALITY), priority=(1, 0)) == 1
    assert co_winners(tied, RuleSpec(PLURALITY)) == {0, 1}


@pytest.mark.parametrize("rule", RANKED_RULES, ids=str)
def test_exhaustive_against_oracle(rule):
    for n in range(1, 5):
        for prof in all_ranked_profiles(3, n):
            assert evaluate_rule(prof, rule).winner == oracle_winner(prof, rule), prof


@given(ranked_profiles(min_m=2, max_m=5, max_n=9))
def test_random_against_oracle(prof):
    for rule in RANKED_RULES:
        if rule.name == "kapproval" and prof.m < 2:
            continue
        assert evaluate_rule(prof, rule).winner == oracle_winner(prof, rule)


@given(ranked_profiles(max_m=4), st.integers(2, 6))
def test_homogeneity(prof, c):
    for rule in RANKED_RULES:
        assert evaluate_rule(prof.scaled(c), rule).winner == evaluate_rule(prof, rule).winner


@given(ranked_profiles(min_m=3, max_m=4), st.integers(1, 5), st.integers(-3, 3))
def test_scoring_affine_invariance(prof, a, b):
    base = [3, 2, 2, 0][: prof.m]
    base[-1] = 0
    sv1 = RuleSpec.scoring(base)
    sv2 = RuleSpec.scoring([a * x + b for x in base])
    assert evaluate_rule(prof, sv1).winner == evaluate_rule(prof, sv2).winner


def test_two_candidates_reduce_to_majority():
    for n in range(1, 8):
        for prof in all_ranked_profiles(2, n):
            d = sum(c for b, c in prof.entries if b == (0, 1)) * 2 - n
            for rule in RANKED_RULES:
                got = evaluate_rule(prof, rule).winner
                if d:
                    assert got == (0 if d > 0 else 1), (rule, prof)
                else:
                    assert got == (1 if rule.name == STV else 0), (rule, prof)


def test_rule_names_all_parse():
    for name in RULE_NAMES:
        param = {"kapproval": ":1", "scoring": ":1,0"}.get(name, "")
        assert parse_rule(name + param).name == name
