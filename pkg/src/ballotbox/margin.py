"""Margin of victory: an exhaustive oracle for desk-scale elections and the
per-rule structural quantities that a large margin forces.

The certificates below are the computable statements of the structural lemmas:
each takes the winner ``w`` of the full election and measures the slack that a
margin of at least ``eps * n`` is supposed to guarantee. All comparisons are
exact (``Fraction``), using the strict or non-strict inequality of the lemma.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .profile import (
    RANKED,
    Profile,
    ProfileError,
    all_ballots,
    approval_scores,
    pairwise_tallies,
    positional_scores,
    require_kind,
    restricted_plurality,
    top_k_counts,
)
from .rules import (
    APPROVAL_RULE,
    BUCKLIN,
    COPELAND,
    MAXIMIN,
    POSITIONAL,
    RUNOFF,
    STV,
    RuleSpec,
    evaluate_rule,
    score_vector_for,
    winner,
)

SCORE_GAP = "ScoreGap"
MAXIMIN_GAP = "MaximinGap"
RELATIVE_MARGIN = "RelativeMargin"
BUCKLIN_LEVELS = "BucklinLevels"
RUNOFF_CONDITIONS = "RunoffConditions"
STV_CHAIN_BOUND = "StvChainBound"

INFINITY = math.inf


class SearchBudgetExceeded(RuntimeError):
    """The exhaustive margin search visited more nodes than allowed."""


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class GapCertificate:
    """Slack quantity for one rule.

    ``value`` is the lemma's quantity; ``threshold`` what a margin of ``eps * n``
    requires of it (``None`` when no ``eps`` was given); ``holds`` whether
    ``value`` clears ``threshold``.
    """

    rule: RuleSpec
    kind: str
    value: object
    winner: int
    threshold: object = None
    holds: Optional[bool] = None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MovResult:
    """Minimum number of replaced ballots that changes the winner.

    ``mov`` is ``None`` when no change of at most ``cap`` ballots works. The
    witness is ``(removed, added)``, two equal-length tuples of ballots.
    """

    mov: Optional[int]
    witness: Optional[tuple] = None
    new_winner: Optional[int] = None
    cap: int = 0
    nodes: int = 0

    @property
    def exceeded(self) -> bool:
        return self.mov is None


def _ceil_log2(m: int) -> int:
    return (m - 1).bit_length()


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _num(q):
    q = _frac(q)
    return q.numerator if q.denominator == 1 else q


def _eps(eps) -> Fraction:
    if isinstance(eps, float):
        eps = Fraction(str(eps))
    return Fraction(eps)


# --- exhaustive margin of victory ---------------------------------------------


def apply_witness(profile: Profile, witness: tuple) -> Profile:
    removed, added = witness
    counts = dict(profile.entries)
    for b in removed:
        counts[b] -= 1
        if counts[b] < 0:
            raise ProfileError(f"witness removes ballot {b!r} more often than it occurs")
    for b in added:
        counts[b] = counts.get(b, 0) + 1
    return Profile.from_counts(profile.m, counts, profile.kind, profile.names)


RESOLUTE = "resolute"
COWINNER = "cowinner"


def brute_force_mov(
    profile: Profile,
    rule: RuleSpec,
    cap: int,
    node_limit: int = 5_000_000,
    semantics: str = RESOLUTE,
    priority: Optional[Sequence[int]] = None,
) -> MovResult:
    """Smallest ``k <= cap`` such that replacing some ``k`` ballots changes the winner.

    With ``semantics="resolute"`` the winner under the fixed tie-break (lowest
    index, or ``priority``) must change. With ``"cowinner"`` it suffices that the
    original winner stops being the unique co-winner, i.e. some tie-breaking order
    elects someone else; a profile whose winner is already tied has margin 0.

    Replacement ballots range over every ballot of the profile's kind. A ballot is
    never replaced by a copy of itself, and each unordered (removed, added) pair of
    multisets is tried once, in lexicographic order, so the witness returned is
    the lexicographically smallest one at the minimal ``k``.
    """
    if semantics not in (RESOLUTE, COWINNER):
        raise ValueError(f"unknown margin semantics {semantics!r}")
    require_kind(profile, rule.ballot_kind)
    m, kind = profile.m, profile.kind
    universe = all_ballots(m, kind)
    index = {b: i for i, b in enumerate(universe)}
    base = [0] * len(universe)
    for b, c in profile.entries:
        base[index[b]] = c
    present = [i for i, c in enumerate(base) if c]
    priorities = [priority] if semantics == RESOLUTE else list(itertools.permutations(range(m)))
    seen: dict = {}
    nodes = 0

    def changed(counts, w) -> Optional[int]:
        """A winner other than ``w`` reachable from ``counts``, else None."""
        key = tuple(counts)
        if key in seen:
            return seen[key]
        entries = tuple((universe[i], c) for i, c in enumerate(counts) if c)
        trial = Profile._trusted(m, kind, entries, profile.names)
        hit = None
        for order in priorities:
            x = winner(trial, rule, order)
            if x != w:
                hit = x
                break
        seen[key] = hit
        return hit

    w = winner(profile, rule, priority)
    other = changed(base, w)
    if other is not None:
        return MovResult(0, ((), ()), other, cap, 0)

    for k in range(1, min(cap, profile.n) + 1):
        for removed in itertools.combinations_with_replacement(present, k):
            if any(removed.count(i) > base[i] for i in set(removed)):
                continue
            counts = base[:]
            for i in removed:
                counts[i] -= 1
            blocked = set(removed)
            choices = [i for i in range(len(universe)) if i not in blocked]
            for added in itertools.combinations_with_replacement(choices, k):
                nodes += 1
                if nodes > node_limit:
                    raise SearchBudgetExceeded(
                        f"margin search exceeded {node_limit} nodes at k={k}"
                    )
                trial = counts[:]
                for i in added:
                    trial[i] += 1
                new = changed(trial, w)
                if new is not None:
                    witness = (
                        tuple(universe[i] for i in removed),
                        tuple(universe[i] for i in added),
                    )
                    return MovResult(k, witness, new, cap, nodes)
    return MovResult(None, None, None, cap, nodes)


# --- score-based gaps --------------------------------------------------------------


def _gap(scores: dict, w: int):
    others = [scores[w] - s for x, s in scores.items() if x != w]
    return min(others) if others else INFINITY


def approval_gap(profile: Profile, rule: RuleSpec) -> GapCertificate:
    """``min_{x != w} s(w) - s(x)``, in normalized units for positional rules."""
    if rule.name == APPROVAL_RULE:
        scores = approval_scores(profile)
    elif rule.name in POSITIONAL:
        require_kind(profile, RANKED)
        if profile.m == 1:
            return GapCertificate(rule, SCORE_GAP, INFINITY, 0)
        scores = positional_scores(profile, score_vector_for(rule, profile.m), normalized=True)
    else:
        raise CertificateError(f"score gap is defined for approval and scoring rules, not {rule}")
    w = evaluate_rule(profile, rule).winner
    value = _gap(scores, w)
    return GapCertificate(rule, SCORE_GAP, value, w, details={"scores": scores})


def maximin_gap(profile: Profile) -> GapCertificate:
    rule = RuleSpec(MAXIMIN)
    result = evaluate_rule(profile, rule)
    return GapCertificate(
        rule, MAXIMIN_GAP, _gap(result.scores, result.winner), result.winner,
        details={"scores": result.scores},
    )


# --- Copeland: relative margin ------------------------------------------------------


def shifted_copeland(D, x: int, t: int, alpha: Fraction) -> Fraction:
    """Copeland-style count for ``x`` when every pairwise margin against it is
    shifted by ``2t``: opponents ``y`` with ``D(y,x) < 2t`` count fully, those with
    ``D(y,x) == 2t`` count ``alpha``."""
    m = len(D)
    below = sum(1 for y in range(m) if y != x and D[y][x] < 2 * t)
    equal = sum(1 for y in range(m) if y != x and D[y][x] == 2 * t)
    return below + alpha * equal


def _rm_holds(D, x, y, t, alpha) -> bool:
    return shifted_copeland(D, x, -t, alpha) <= shifted_copeland(D, y, t, alpha)


def relative_margin(profile: Profile, x: int, y: int, alpha=Fraction(1, 2), D=None) -> int:
    """Smallest integer ``t`` with ``s'_{-t}(x) <= s'_t(y)``.

    The left side is non-increasing and the right side non-decreasing in ``t``,
    so the predicate is monotone and a binary search over ``[-n, n]`` suffices.
    """
    if x == y:
        raise ValueError("relative margin needs two distinct candidates")
    alpha = _eps(alpha)
    if D is None:
        D = pairwise_tallies(profile).D
    n = profile.n
    lo, hi = -n, n
    if _rm_holds(D, x, y, lo, alpha):
        return lo
    # invariant: predicate false at lo, true at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _rm_holds(D, x, y, mid, alpha):
            hi = mid
        else:
            lo = mid
    return hi


def gamma(profile: Profile, alpha=Fraction(1, 2)) -> GapCertificate:
    """Minimum relative margin between the Copeland winner and any other candidate."""
    rule = RuleSpec(COPELAND, alpha=_eps(alpha))
    w = evaluate_rule(profile, rule).winner
    D = pairwise_tallies(profile).D
    per_pair = {x: relative_margin(profile, w, x, rule.alpha, D) for x in range(profile.m) if x != w}
    value = min(per_pair.values()) if per_pair else INFINITY
    return GapCertificate(rule, RELATIVE_MARGIN, value, w, details={"rm": per_pair})


# --- Bucklin ----------------------------------------------------------------------------


def _first_level(profile: Profile, x: int, threshold: Fraction) -> Optional[int]:
    for k in range(1, profile.m + 1):
        if top_k_counts(profile, k)[x] >= threshold:
            return k
    return None


def bucklin_levels(profile: Profile, eps) -> GapCertificate:
    """Winner reaches ``n/2 + eps*n/3`` strictly earlier than anyone else reaches
    ``n/2 - eps*n/3``."""
    eps = _eps(eps)
    if not 0 < eps <= 1:
        raise CertificateError("eps must lie in (0, 1]")
    rule = RuleSpec(BUCKLIN)
    w = evaluate_rule(profile, rule).winner
    n, m = profile.n, profile.m
    b_w = _first_level(profile, w, Fraction(n, 2) + eps * n / 3)
    b_x = {x: _first_level(profile, x, Fraction(n, 2) - eps * n / 3) for x in range(m) if x != w}
    if not b_x:
        value = INFINITY
    elif b_w is None:
        value = min(b - (m + 1) for b in b_x.values())
    else:
        value = min(b - b_w for b in b_x.values())
    return GapCertificate(
        rule, BUCKLIN_LEVELS, value, w, threshold=0, holds=value > 0,
        details={"b_w": b_w, "b_x": b_x},
    )


# --- plurality with runoff ----------------------------------------------------------------


def runoff_conditions(profile: Profile, eps) -> GapCertificate:
    """Slack of the three runoff conditions; each must be strictly positive.

    1. ``D(w,r) - 2 eps n``
    2. ``2 s(w) - s(x) - s(r) - eps n`` for every ``x`` outside the final
    3. ``D(w,x) - eps n / 2`` for every ``x`` outside the final with
       ``s(x) > s(r) - eps n / 2`` (vacuous otherwise)
    """
    eps = _eps(eps)
    rule = RuleSpec(RUNOFF)
    result = evaluate_rule(profile, rule)
    w = result.winner
    n, m = profile.n, profile.m
    if m == 1:
        return GapCertificate(rule, RUNOFF_CONDITIONS, INFINITY, w, 0, True)
    s = result.scores
    finals = next(e for e in result.trace if e.action == "finalists").candidates
    r = finals[1] if finals[0] == w else finals[0]
    D = pairwise_tallies(profile).D
    en = eps * n
    cond1 = _num(D[w][r] - 2 * en)
    cond2 = {x: _num(2 * s[w] - s[x] - s[r] - en) for x in range(m) if x not in (w, r)}
    cond3 = {
        x: _num(D[w][x] - en / 2)
        for x in range(m)
        if x not in (w, r) and s[x] > s[r] - en / 2
    }
    slacks = [cond1, *cond2.values(), *cond3.values()]
    value = min(slacks)
    return GapCertificate(
        rule, RUNOFF_CONDITIONS, value, w, threshold=0, holds=value > 0,
        details={"runner_up": r, "condition1": cond1, "condition2": cond2, "condition3": cond3},
    )


# --- STV ------------------------------------------------------------------------------------


def stv_chain_bound(profile: Profile, order: Sequence[int], winner: Optional[int] = None) -> int:
    """Votes needed to force the elimination order ``order`` (last entry survives).

    Sum over rounds of the eliminated candidate's restricted plurality score minus
    the round minimum. ``order`` must be a permutation not ending at the winner.
    """
    require_kind(profile, RANKED)
    m = profile.m
    order = tuple(order)
    if sorted(order) != list(range(m)):
        raise CertificateError(f"order {order!r} is not a permutation of the candidates")
    if winner is None:
        winner = evaluate_rule(profile, RuleSpec(STV)).winner
    if order[-1] == winner:
        raise CertificateError("chain must not end at the STV winner")
    total = 0
    alive = set(range(m))
    for x in order[:-1]:
        scores = restricted_plurality(profile, alive)
        total += scores[x] - min(scores.values())
        alive.remove(x)
    return total


def stv_min_chain(profile: Profile, max_m: int = 7) -> GapCertificate:
    """Minimum chain bound over every admissible elimination order."""
    m = profile.m
    if m > max_m:
        raise CertificateError(f"chain enumeration limited to m <= {max_m}")
    rule = RuleSpec(STV)
    w = evaluate_rule(profile, rule).winner
    best, best_order = INFINITY, None
    for order in itertools.permutations(range(m)):
        if order[-1] == w:
            continue
        b = stv_chain_bound(profile, order, w)
        if b < best:
            best, best_order = b, order
    return GapCertificate(rule, STV_CHAIN_BOUND, best, w, details={"order": best_order})


# --- per-rule dispatch ------------------------------------------------------------------------


def certify(profile: Profile, rule: RuleSpec, eps) -> GapCertificate:
    """The gap certificate matching ``rule``, judged against a margin of ``eps * n``."""
    eps = _eps(eps)
    if not 0 < eps <= 1:
        raise CertificateError("eps must lie in (0, 1]")
    en = eps * profile.n
    if rule.name == BUCKLIN:
        return bucklin_levels(profile, eps)
    if rule.name == RUNOFF:
        return runoff_conditions(profile, eps)
    if rule.name == APPROVAL_RULE:
        cert, threshold = approval_gap(profile, rule), en
    elif rule.name in POSITIONAL:
        cert, threshold = approval_gap(profile, rule), en / 2
    elif rule.name == MAXIMIN:
        cert, threshold = maximin_gap(profile), en
    elif rule.name == COPELAND:
        cert = gamma(profile, rule.alpha)
        threshold = en / (2 * (_ceil_log2(profile.m) + 1))
    elif rule.name == STV:
        cert, threshold = stv_min_chain(profile), en
    else:
        raise CertificateError(f"no certificate for rule {rule}")
    threshold = _num(threshold)
    return GapCertificate(
        cert.rule, cert.kind, cert.value, cert.winner, threshold,
        cert.value >= threshold, cert.details,
    )
