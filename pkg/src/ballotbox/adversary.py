"""Hard instances for winner prediction and the divergences that certify them.

Each family is a list of ballot distributions, one per intended winner, that
are statistically close to one another yet have different winners with a
large margin. Distributions are exact rationals; divergences are reported as
floats (natural log).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

from .profile import RANKED, Profile, ProfileError, ballot_key

RANKING = "ranking"
SUBSET = "subset"


class InfiniteDivergence(ValueError):
    """KL divergence with ``p(x) > 0`` where ``q(x) = 0``."""


def _q(x) -> Fraction:
    if isinstance(x, float):
        x = repr(x)
    return Fraction(x)


@dataclass(frozen=True)
class BallotDistribution:
    """Finite distribution over ballots; ``support`` holds ``(ballot, probability)``."""

    support: tuple
    alphabet: str = RANKING

    def __post_init__(self):
        support = tuple((b, _q(p)) for b, p in self.support)
        if any(p < 0 for _, p in support):
            raise ValueError("probabilities must be non-negative")
        if sum(p for _, p in support) != 1:
            raise ValueError("probabilities must sum to exactly 1")
        if len({b for b, _ in support}) != len(support):
            raise ValueError("support has repeated ballots")
        object.__setattr__(self, "support", support)

    def as_dict(self) -> dict:
        return dict(self.support)

    def __getitem__(self, ballot) -> Fraction:
        return self.as_dict().get(ballot, Fraction(0))


def kl_divergence(p: BallotDistribution, q: BallotDistribution) -> float:
    """``sum_x p(x) ln(p(x)/q(x))`` with ``0 ln 0 = 0``."""
    qd = q.as_dict()
    total = 0.0
    for x, px in p.support:
        if px == 0:
            continue
        qx = qd.get(x, 0)
        if qx == 0:
            raise InfiniteDivergence(f"p puts mass on {x!r} where q has none")
        total += float(px) * math.log(px / qx)
    return total


def mixture(members: Sequence[BallotDistribution]) -> BallotDistribution:
    """Equal-weight average of ``members``."""
    acc: dict = {}
    for mu in members:
        for x, p in mu.support:
            acc[x] = acc.get(x, 0) + p
    d = len(members)
    support = tuple((x, acc[x] / d) for x in sorted(acc, key=ballot_key))
    return BallotDistribution(support, members[0].alphabet)


def generalized_js(members: Sequence[BallotDistribution]) -> float:
    """Mean KL divergence of each member from the equal-weight mixture."""
    if len(members) < 2:
        raise ValueError("need at least two distributions")
    avg = mixture(members)
    return sum(kl_divergence(mu, avg) for mu in members) / len(members)


def js_divergence(p: BallotDistribution, q: BallotDistribution) -> float:
    avg = mixture([p, q])
    return (kl_divergence(p, avg) + kl_divergence(q, avg)) / 2


# --- rounding -------------------------------------------------------------------------


def largest_remainder(n: int, probs: Sequence[Fraction]) -> list:
    """Apportion ``n`` among ``probs`` (Hamilton's method); earlier entries win
    remainder ties. Each count is within 1 of ``p * n``."""
    quotas = [Fraction(p) * n for p in probs]
    counts = [math.floor(q) for q in quotas]
    left = n - sum(counts)
    order = sorted(range(len(probs)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:left]:
        counts[i] += 1
    return counts


def realize(dist: BallotDistribution, n: int, m: int, to_ranking=None) -> Profile:
    """Profile with about ``p * n`` copies of each support ballot."""
    ballots = [b for b, _ in dist.support]
    counts = largest_remainder(n, [p for _, p in dist.support])
    if to_ranking is not None:
        ballots = [to_ranking(b) for b in ballots]
    merged: dict = {}
    for b, c in zip(ballots, counts):
        if c:
            merged[b] = merged.get(b, 0) + c
    return Profile.from_counts(m, merged, RANKED)


def complete_ranking(m: int, top: Sequence[int]) -> tuple:
    """``top`` in ascending id order, followed by the remaining candidates ascending."""
    head = sorted(top)
    rest = [c for c in range(m) if c not in set(head)]
    return tuple(head + rest)


# --- families -------------------------------------------------------------------------


@dataclass(frozen=True)
class AdversarialFamily:
    """Members ``members[i]`` should elect ``winners[i]``; ``profiles`` are the
    members realized at ``n`` voters."""

    family: str
    m: int
    params: dict
    members: tuple
    winners: tuple
    profiles: tuple = field(default=())


def _check_eps(eps, upper=1) -> Fraction:
    eps = _q(eps)
    if not 0 <= eps < upper:
        raise ValueError(f"epsilon must lie in [0, {upper}), got {eps}")
    return eps


def gen_two_candidate(eps, n: int, which: int = 0) -> Profile:
    """Two candidates, ``ceil((1/2 + eps) n)`` voters rank ``which`` first."""
    eps = _q(eps)
    if not 0 <= eps < Fraction(1, 2):
        raise ValueError("epsilon must lie in [0, 1/2)")
    if n < 2:
        raise ProfileError("need at least two voters")
    if which not in (0, 1):
        raise ValueError("which must be 0 or 1")
    top = math.ceil((Fraction(1, 2) + eps) * n)
    favoured = (which, 1 - which)
    counts = {favoured: top}
    if n - top:
        counts[favoured[::-1]] = n - top
    return Profile.from_counts(2, counts, RANKED)


def two_candidate_members(eps) -> list:
    """The two mirror-image distributions ``(1/2 + eps, 1/2 - eps)`` over ``a>b``, ``b>a``."""
    eps = _check_eps(eps, Fraction(1, 2))
    hi, lo = Fraction(1, 2) + eps, Fraction(1, 2) - eps
    return [
        BallotDistribution((((0, 1), hi), ((1, 0), lo))),
        BallotDistribution((((0, 1), lo), ((1, 0), hi))),
    ]


def gen_two_candidate_family(eps, n: int = 0) -> AdversarialFamily:
    profiles = tuple(gen_two_candidate(eps, n, w) for w in (0, 1)) if n else ()
    return AdversarialFamily(
        "two", 2, {"epsilon": str(_q(eps)), "n": n},
        tuple(two_candidate_members(eps)), (0, 1), profiles,
    )


def kapproval_members(m: int, k: int, eps) -> list:
    eps = _check_eps(eps)
    M = k + 1
    if not 1 <= k or M > m:
        raise ValueError(f"k-approval family needs 1 <= k and k+1 <= m, got m={m}, k={k}")
    subsets = [frozenset(s) for s in itertools.combinations(range(M), k)]
    subsets.sort(key=ballot_key)
    base = (1 - eps) / comb(M, k)
    boost = eps / comb(M - 1, k - 1)
    return [
        BallotDistribution(tuple((x, base + boost if i in x else base) for x in subsets), SUBSET)
        for i in range(M)
    ]


def gen_kapproval_family(m: int, k: int, eps, n: int = 0) -> AdversarialFamily:
    """``k+1`` members over k-subsets of the first ``k+1`` candidates; member ``i``
    boosts every subset containing candidate ``i``. Realized profiles put the
    subset on top of each ranking."""
    members = kapproval_members(m, k, eps)
    profiles = tuple(
        realize(mu, n, m, lambda x: complete_ranking(m, x)) for mu in members
    ) if n else ()
    return AdversarialFamily(
        "kapproval", m, {"m": m, "k": k, "epsilon": str(_q(eps)), "n": n},
        tuple(members), tuple(range(k + 1)), profiles,
    )


def borda_members(m: int, eps, max_m: int = 8) -> list:
    """Member ``i`` gives each ranking mass ``(1+eps)/m!`` when candidate ``i`` is in
    the top half, ``(1-eps)/m!`` otherwise. Half the rankings fall in each class,
    so the masses sum to exactly 1."""
    eps = _check_eps(eps)
    if m % 2 or m < 4:
        raise ValueError("Borda family needs an even m >= 4")
    if m > max_m:
        raise ValueError(f"explicit ranking support limited to m <= {max_m}")
    rankings = list(itertools.permutations(range(m)))
    f = math.factorial(m)
    hi, lo = (1 + eps) / f, (1 - eps) / f
    return [
        BallotDistribution(tuple((r, hi if r.index(i) < m // 2 else lo) for r in rankings))
        for i in range(m)
    ]


def borda_class_representatives(m: int, i: int) -> list:
    """Rankings with candidate ``i`` at each position, the others arranged by every
    cyclic rotation of the ascending and of the descending order.

    For each position of ``i`` the others occupy every remaining slot equally
    often and each ordered pair of others appears in both orders equally often,
    so positional totals and all pairwise tallies match the uniform average over
    the rankings with ``i`` at that position.
    """
    others = [c for c in range(m) if c != i]
    arrangements = []
    for base in (others, others[::-1]):
        for r in range(len(base)):
            arrangements.append(base[r:] + base[:r])
    reps = []
    for pos in range(m):
        for arr in arrangements:
            reps.append(tuple(arr[:pos] + [i] + arr[pos:]))
    return reps


def borda_realized_member(m: int, i: int, eps, n: int) -> Profile:
    eps = _q(eps)
    reps = borda_class_representatives(m, i)
    per_pos = 2 * (m - 1)
    probs = []
    for pos in range(m):
        mass = (1 + eps) / m if pos < m // 2 else (1 - eps) / m
        probs.extend([mass / per_pos] * per_pos)
    dist = BallotDistribution(tuple(zip(reps, probs)))
    return realize(dist, n, m)


def gen_borda_family(m: int, eps, n: int = 0, explicit_members: bool = True) -> AdversarialFamily:
    eps = _check_eps(eps)
    if m % 2 or m < 4:
        raise ValueError("Borda family needs an even m >= 4")
    members = tuple(borda_members(m, eps)) if explicit_members else ()
    profiles = tuple(borda_realized_member(m, i, eps, n) for i in range(m)) if n else ()
    return AdversarialFamily(
        "borda", m, {"m": m, "epsilon": str(eps), "n": n}, members, tuple(range(m)), profiles,
    )


def bucklin_members(m: int, eps) -> list:
    """Member ``i`` over ``m/4``-subsets (the top quarter of a ranking): subsets
    containing ``i`` get ``(1-eps)/C(m-1, m/4-1) + eps/C(m, m/4)``, all others
    ``eps/C(m, m/4)``."""
    eps = _check_eps(eps)
    if m % 4 or m < 4:
        raise ValueError("Bucklin family needs m divisible by 4")
    q = m // 4
    subsets = sorted((frozenset(s) for s in itertools.combinations(range(m), q)), key=ballot_key)
    base = eps / comb(m, q)
    boost = (1 - eps) / comb(m - 1, q - 1)
    return [
        BallotDistribution(tuple((x, base + boost if i in x else base) for x in subsets), SUBSET)
        for i in range(m)
    ]


def gen_bucklin_family(m: int, eps, n: int = 0) -> AdversarialFamily:
    members = bucklin_members(m, eps)
    profiles = tuple(
        realize(mu, n, m, lambda x: complete_ranking(m, x)) for mu in members
    ) if n else ()
    return AdversarialFamily(
        "bucklin", m, {"m": m, "epsilon": str(_q(eps)), "n": n},
        tuple(members), tuple(range(m)), profiles,
    )


def build_family(family: str, **params) -> AdversarialFamily:
    """Family by name from keyword parameters (as stored in a manifest)."""
    if family == "two":
        return gen_two_candidate_family(params["epsilon"], int(params.get("n", 0)))
    if family == "kapproval":
        return gen_kapproval_family(int(params["m"]), int(params["k"]), params["epsilon"], int(params.get("n", 0)))
    if family == "borda":
        return gen_borda_family(int(params["m"]), params["epsilon"], int(params.get("n", 0)))
    if family == "bucklin":
        return gen_bucklin_family(int(params["m"]), params["epsilon"], int(params.get("n", 0)))
    raise ValueError(f"unknown family {family!r}")


def family_divergence_report(family: AdversarialFamily) -> dict:
    """KL divergence of every member from the family mixture, plus their mean."""
    avg = mixture(family.members)
    kl = [kl_divergence(mu, avg) for mu in family.members]
    return {"kl": kl, "max_kl": max(kl), "js": sum(kl) / len(kl)}
