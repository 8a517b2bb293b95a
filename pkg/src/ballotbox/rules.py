"""Winner determination for every supported voting rule.

All rules are resolute. Ties are broken by lowest candidate index: the winner,
runoff finalists and Bucklin levels favour the lowest index, and an STV round
eliminates the lowest index among the candidates with the fewest votes (so a
two-way STV tie goes to the higher index).
"""

from __future__ import annotations

import itertools

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

from .profile import (
    APPROVAL,
    RANKED,
    Profile,
    ProfileError,
    ScoreVector,
    approval_scores,
    pairwise_tallies,
    positional_scores,
    require_kind,
    restricted_plurality,
)

PLURALITY = "plurality"
KAPPROVAL = "kapproval"
SCORING = "scoring"
BORDA = "borda"
APPROVAL_RULE = "approval"
MAXIMIN = "maximin"
COPELAND = "copeland"
BUCKLIN = "bucklin"
RUNOFF = "runoff"
STV = "stv"
GENERIC = "generic"

RULE_NAMES = (
    PLURALITY, KAPPROVAL, SCORING, BORDA, APPROVAL_RULE, MAXIMIN, COPELAND,
    BUCKLIN, RUNOFF, STV,
)


class RuleError(ValueError):
    """Bad rule name or parameters."""


@dataclass(frozen=True)
class RuleSpec:
    """A voting rule plus its parameters.

    Only the parameter relevant to ``name`` is set: ``k`` for k-approval,
    ``vector`` for scoring rules, ``alpha`` for Copeland. A ``generic`` rule
    wraps an arbitrary function from profiles to a candidate id.
    """

    name: str
    k: Optional[int] = None
    vector: Optional[ScoreVector] = None
    alpha: Optional[Fraction] = None
    func: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.name not in RULE_NAMES + (GENERIC,):
            raise RuleError(f"unknown rule {self.name!r}")
        if self.name == KAPPROVAL and (self.k is None or self.k < 1):
            raise RuleError("k-approval needs k >= 1")
        if self.name == SCORING and self.vector is None:
            raise RuleError("scoring rule needs a score vector")
        if self.name == COPELAND:
            alpha = Fraction(str(self.alpha)) if isinstance(self.alpha, float) else Fraction(
                self.alpha if self.alpha is not None else Fraction(1, 2)
            )
            if not 0 <= alpha <= 1:
                raise RuleError("Copeland alpha must lie in [0, 1]")
            object.__setattr__(self, "alpha", alpha)
        if self.name == GENERIC and self.func is None:
            raise RuleError("generic rule needs a function")

    @property
    def ballot_kind(self) -> str:
        return APPROVAL if self.name == APPROVAL_RULE else RANKED

    def __str__(self):
        if self.name == KAPPROVAL:
            return f"kapproval:{self.k}"
        if self.name == SCORING:
            return "scoring:" + ",".join(str(a) for a in self.vector.alphas)
        if self.name == COPELAND:
            return f"copeland:{self.alpha}"
        return self.name

    # convenience constructors
    @classmethod
    def plurality(cls):
        return cls(PLURALITY)

    @classmethod
    def k_approval(cls, k: int):
        return cls(KAPPROVAL, k=k)

    @classmethod
    def scoring(cls, alphas):
        return cls(SCORING, vector=alphas if isinstance(alphas, ScoreVector) else ScoreVector(tuple(alphas)))

    @classmethod
    def copeland(cls, alpha=Fraction(1, 2)):
        return cls(COPELAND, alpha=alpha)

    @classmethod
    def generic(cls, func: Callable):
        return cls(GENERIC, func=func)


def parse_rule(text: str) -> RuleSpec:
    """Parse ``name[:param]``, e.g. ``plurality``, ``kapproval:3``, ``copeland:1/2``,
    ``scoring:3,1,0``."""
    name, _, param = text.strip().lower().partition(":")
    aliases = {"k-approval": KAPPROVAL, "plurality-runoff": RUNOFF, "pluralityrunoff": RUNOFF}
    name = aliases.get(name, name)
    if name not in RULE_NAMES:
        raise RuleError(f"unknown rule {text!r}; expected one of {', '.join(RULE_NAMES)}")
    try:
        if name == KAPPROVAL:
            return RuleSpec(name, k=int(param))
        if name == SCORING:
            return RuleSpec(name, vector=ScoreVector(tuple(Fraction(a) for a in param.split(","))))
        if name == COPELAND:
            return RuleSpec(name, alpha=Fraction(param) if param else Fraction(1, 2))
    except (ValueError, ZeroDivisionError, ProfileError) as exc:
        raise RuleError(f"bad parameter for rule {name}: {param!r} ({exc})") from exc
    if param:
        raise RuleError(f"rule {name} takes no parameter")
    return RuleSpec(name)


class Event(NamedTuple):
    """One decision step: ``candidates`` are those in contention (a tied set, the
    runoff finalists, or the STV candidates still alive) and ``chosen`` the one
    picked (tie winner, plurality leader, eliminated candidate)."""

    action: str
    candidates: tuple
    chosen: int


@dataclass(frozen=True)
class WinnerResult:
    winner: int
    scores: dict
    trace: tuple = ()


def _argbest(scores, candidates, trace, label, minimize=False):
    """Best candidate under lowest-index tie-breaking, logging ties to ``trace``."""
    vals = [scores[c] for c in candidates]
    best = min(vals) if minimize else max(vals)
    tied = tuple(c for c in candidates if scores[c] == best)
    if len(tied) > 1:
        trace.append(Event(f"tie:{label}", tied, tied[0]))
    return tied[0]


def _check_kind(profile: Profile, rule: RuleSpec) -> None:
    if rule.name != GENERIC:
        require_kind(profile, rule.ballot_kind)


def score_vector_for(rule: RuleSpec, m: int) -> ScoreVector:
    if rule.name == PLURALITY:
        return ScoreVector.k_approval(m, 1)
    if rule.name == KAPPROVAL:
        return ScoreVector.k_approval(m, rule.k)
    if rule.name == BORDA:
        return ScoreVector.borda(m)
    if rule.name == SCORING:
        return rule.vector
    raise RuleError(f"{rule.name} is not a positional scoring rule")


POSITIONAL = (PLURALITY, KAPPROVAL, SCORING, BORDA)


def maximin_scores(D) -> dict:
    m = len(D)
    return {x: min((D[x][y] for y in range(m) if y != x), default=0) for x in range(m)}


def copeland_scores(D, alpha: Fraction) -> dict:
    m = len(D)
    out = {}
    for x in range(m):
        wins = sum(1 for y in range(m) if y != x and D[x][y] > 0)
        ties = sum(1 for y in range(m) if y != x and D[x][y] == 0)
        s = wins + alpha * ties
        out[x] = s.numerator if isinstance(s, Fraction) and s.denominator == 1 else s
    return out


def bucklin_levels(profile: Profile) -> dict:
    """Smallest prefix length at which each candidate is ranked by a strict majority."""
    n, m = profile.n, profile.m
    levels = {}
    counts = dict.fromkeys(range(m), 0)
    for k in range(1, m + 1):
        for order, c in profile.entries:
            counts[order[k - 1]] += c
        for x in range(m):
            if x not in levels and 2 * counts[x] > n:
                levels[x] = k
    return dict(sorted(levels.items()))


def evaluate_rule(profile: Profile, rule: RuleSpec) -> WinnerResult:
    _check_kind(profile, rule)
    m = profile.m
    cands = tuple(range(m))
    trace: list = []

    if rule.name == GENERIC:
        winner = int(rule.func(profile))
        if not 0 <= winner < m:
            raise RuleError(f"custom rule returned {winner}, outside 0..{m - 1}")
        return WinnerResult(winner, {}, ())

    if rule.name in POSITIONAL:
        if rule.name == KAPPROVAL and not 1 <= rule.k <= m - 1:
            raise ProfileError(f"k-approval needs 1 <= k <= m-1, got k={rule.k}, m={m}")
        if m == 1:
            return WinnerResult(0, {0: profile.n}, ())
        scores = positional_scores(profile, score_vector_for(rule, m))
        return WinnerResult(_argbest(scores, cands, trace, "score"), scores, tuple(trace))

    if rule.name == APPROVAL_RULE:
        scores = approval_scores(profile)
        return WinnerResult(_argbest(scores, cands, trace, "score"), scores, tuple(trace))

    if rule.name == MAXIMIN:
        scores = maximin_scores(pairwise_tallies(profile).D)
        return WinnerResult(_argbest(scores, cands, trace, "score"), scores, tuple(trace))

    if rule.name == COPELAND:
        scores = copeland_scores(pairwise_tallies(profile).D, rule.alpha)
        return WinnerResult(_argbest(scores, cands, trace, "score"), scores, tuple(trace))

    if rule.name == BUCKLIN:
        levels = bucklin_levels(profile)
        return WinnerResult(_argbest(levels, cands, trace, "level", minimize=True), levels, tuple(trace))

    if rule.name == RUNOFF:
        scores = restricted_plurality(profile, cands)
        first = _argbest(scores, cands, trace, "first-finalist")
        rest = tuple(c for c in cands if c != first)
        if not rest:
            return WinnerResult(first, scores, tuple(trace))
        second = _argbest(scores, rest, trace, "second-finalist")
        trace.append(Event("finalists", (first, second), first))
        D = pairwise_tallies(profile).D
        a, b = sorted((first, second))
        if D[a][b] == 0:
            trace.append(Event("tie:runoff", (a, b), a))
        winner = a if D[a][b] >= 0 else b
        return WinnerResult(winner, scores, tuple(trace))

    if rule.name == STV:
        alive = list(cands)
        survival = {}
        for rnd in range(1, m):
            scores = restricted_plurality(profile, alive)
            loser = _argbest(scores, alive, trace, "eliminate", minimize=True)
            trace.append(Event("eliminate", tuple(alive), loser))
            survival[loser] = rnd
            alive.remove(loser)
        survival[alive[0]] = m
        return WinnerResult(alive[0], dict(sorted(survival.items())), tuple(trace))

    raise RuleError(f"unhandled rule {rule.name}")


def winner(profile: Profile, rule: RuleSpec, priority: Optional[Sequence[int]] = None) -> int:
    """Winner when ties favour ``priority`` (candidate ids, strongest first)
    instead of the lowest index."""
    if priority is None:
        return evaluate_rule(profile, rule).winner
    perm = [0] * profile.m
    for rank, c in enumerate(priority):
        perm[c] = rank
    return priority[evaluate_rule(profile.relabeled(perm), rule).winner]


def co_winners(profile: Profile, rule: RuleSpec) -> frozenset:
    """Candidates that win under at least one tie-breaking order.

    For STV this is the parallel-universe winner set; for score-based rules it is
    the set of candidates with the best score.
    """
    return frozenset(
        winner(profile, rule, priority) for priority in itertools.permutations(range(profile.m))
    )


def score_table(profile: Profile, rule: RuleSpec) -> dict:
    return evaluate_rule(profile, rule).scores


def condorcet_winner(profile: Profile) -> Optional[int]:
    D = pairwise_tallies(profile).D
    m = profile.m
    for x in range(m):
        if all(D[x][y] > 0 for y in range(m) if y != x):
            return x
    return None
