"""Election data model: ballots, profiles, and tally primitives.

Candidates are dense integer ids ``0..m-1``. A ranked ballot is a tuple holding a
permutation of the ids (most preferred first); an approval ballot is a frozenset
of ids. Profiles are stored multiplicity-compressed as sorted ``(ballot, count)``
entries, so two profiles with the same multiset of ballots compare equal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

RANKED = "ranked"
APPROVAL = "approval"
KINDS = (RANKED, APPROVAL)

Ballot = Union[tuple, frozenset]
Number = Union[int, Fraction]


class ProfileError(ValueError):
    """Malformed ballots or profile parameters."""


class KindMismatch(ProfileError):
    """An operation was given a profile of the wrong ballot kind."""


def ballot_key(ballot: Ballot) -> tuple:
    """Sort key giving the canonical order of ballots of either kind."""
    if isinstance(ballot, frozenset):
        return tuple(sorted(ballot))
    return ballot


def all_ballots(m: int, kind: str) -> list:
    """Every ballot of ``kind`` over ``m`` candidates, in canonical order."""
    if kind == RANKED:
        return list(itertools.permutations(range(m)))
    subsets = [
        frozenset(c) for r in range(m + 1) for c in itertools.combinations(range(m), r)
    ]
    return sorted(subsets, key=ballot_key)


def _check_ballot(ballot, m: int, kind: str) -> Ballot:
    if kind == RANKED:
        order = tuple(ballot)
        if len(order) != m or sorted(order) != list(range(m)):
            raise ProfileError(f"ranked ballot {order!r} is not a permutation of 0..{m - 1}")
        return order
    approved = frozenset(ballot)
    if any(not isinstance(c, int) or not 0 <= c < m for c in approved):
        raise ProfileError(f"approval ballot {sorted(approved)!r} has ids outside 0..{m - 1}")
    return approved


@dataclass(frozen=True)
class Profile:
    """A multiset of ballots over ``m`` named candidates."""

    m: int
    kind: str
    entries: tuple
    names: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProfileError(f"unknown ballot kind {self.kind!r}")
        if self.m < 1:
            raise ProfileError("an election needs at least one candidate")
        names = tuple(self.names) if self.names else default_names(self.m)
        if len(names) != self.m:
            raise ProfileError(f"expected {self.m} candidate names, got {len(names)}")
        if len(set(names)) != len(names):
            raise ProfileError("candidate names must be unique")
        merged: dict = {}
        for ballot, count in self.entries:
            if not isinstance(count, int) or count < 1:
                raise ProfileError(f"ballot count must be a positive integer, got {count!r}")
            b = _check_ballot(ballot, self.m, self.kind)
            merged[b] = merged.get(b, 0) + count
        if not merged:
            raise ProfileError("no ballots")
        entries = tuple(sorted(merged.items(), key=lambda e: ballot_key(e[0])))
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_ballots(cls, m: int, ballots: Iterable, kind: str = RANKED, names: Sequence[str] = ()):
        return cls(m, kind, tuple((b, 1) for b in ballots), tuple(names))

    @classmethod
    def from_counts(cls, m: int, counts: Mapping, kind: str = RANKED, names: Sequence[str] = ()):
        return cls(m, kind, tuple((b, c) for b, c in counts.items() if c), tuple(names))

    @classmethod
    def _trusted(cls, m: int, kind: str, entries: tuple, names: tuple) -> "Profile":
        # Skips validation; entries must already be canonical.
        obj = object.__new__(cls)
        object.__setattr__(obj, "m", m)
        object.__setattr__(obj, "kind", kind)
        object.__setattr__(obj, "entries", entries)
        object.__setattr__(obj, "names", names)
        return obj

    @property
    def n(self) -> int:
        return sum(c for _, c in self.entries)

    @property
    def ballots(self) -> tuple:
        return tuple(b for b, _ in self.entries)

    @property
    def counts(self) -> tuple:
        return tuple(c for _, c in self.entries)

    def scaled(self, factor: int) -> "Profile":
        """Every count multiplied by ``factor``."""
        if factor < 1:
            raise ProfileError("scale factor must be >= 1")
        return Profile._trusted(
            self.m, self.kind, tuple((b, c * factor) for b, c in self.entries), self.names
        )

    def relabeled(self, perm: Sequence[int]) -> "Profile":
        """Same election with candidate ``c`` renamed to ``perm[c]``."""
        if sorted(perm) != list(range(self.m)):
            raise ProfileError("relabeling must be a permutation of the candidate ids")
        if self.kind == RANKED:
            entries = tuple((tuple(perm[c] for c in b), k) for b, k in self.entries)
        else:
            entries = tuple((frozenset(perm[c] for c in b), k) for b, k in self.entries)
        names = [""] * self.m
        for c, name in enumerate(self.names):
            names[perm[c]] = name
        entries = tuple(sorted(entries, key=lambda e: ballot_key(e[0])))
        return Profile._trusted(self.m, self.kind, entries, tuple(names))

    def expanded(self) -> list:
        """One ballot per voter, in canonical order."""
        return [b for b, c in self.entries for _ in range(c)]


def default_names(m: int) -> tuple:
    if m <= 26:
        return tuple("abcdefghijklmnopqrstuvwxyz"[:m])
    return tuple(f"c{i}" for i in range(m))


def require_kind(profile: Profile, kind: str) -> None:
    if profile.kind != kind:
        raise KindMismatch(f"operation needs a {kind} profile, got {profile.kind}")


@dataclass(frozen=True)
class ScoreVector:
    """Positional score vector ``alpha_1 >= ... >= alpha_m`` with ``alpha_1 > alpha_m``.

    ``alphas`` keeps the vector as given (scores are reported in those units);
    ``normalized`` is the affine rescale with first entry 1 and last entry 0.
    Equality and hashing use the normalized form, since the winner is invariant
    under positive affine maps of the vector.
    """

    alphas: tuple

    def __post_init__(self):
        alphas = tuple(_as_number(a) for a in self.alphas)
        if len(alphas) < 2:
            raise ProfileError("a score vector needs at least two positions")
        if any(a < b for a, b in zip(alphas, alphas[1:])):
            raise ProfileError("score vector must be non-increasing")
        if alphas[0] == alphas[-1]:
            raise ProfileError("score vector must have alpha_1 > alpha_m")
        object.__setattr__(self, "alphas", alphas)

    @property
    def normalized(self) -> tuple:
        top, bottom = self.alphas[0], self.alphas[-1]
        return tuple(_as_number(Fraction(a - bottom) / (top - bottom)) for a in self.alphas)

    def __eq__(self, other):
        return isinstance(other, ScoreVector) and self.normalized == other.normalized

    def __hash__(self):
        return hash(self.normalized)

    def __len__(self):
        return len(self.alphas)

    @classmethod
    def borda(cls, m: int) -> "ScoreVector":
        return cls(tuple(range(m - 1, -1, -1)))

    @classmethod
    def k_approval(cls, m: int, k: int) -> "ScoreVector":
        if not 1 <= k <= m - 1:
            raise ProfileError(f"k-approval needs 1 <= k <= m-1, got k={k}, m={m}")
        return cls(tuple(1 if i < k else 0 for i in range(m)))


def _as_number(value) -> Number:
    """Exact rational, collapsed to ``int`` when integral."""
    if isinstance(value, float):
        value = Fraction(str(value))
    q = Fraction(value)
    return q.numerator if q.denominator == 1 else q


# --- tallies ---------------------------------------------------------------


@dataclass(frozen=True)
class PairwiseTallies:
    """``N[x][y]`` voters preferring x to y, and ``D[x][y] = N[x][y] - N[y][x]``."""

    N: tuple
    D: tuple


def pairwise_tallies(profile: Profile) -> PairwiseTallies:
    require_kind(profile, RANKED)
    m = profile.m
    N = [[0] * m for _ in range(m)]
    for order, count in profile.entries:
        for i, x in enumerate(order):
            row = N[x]
            for y in order[i + 1:]:
                row[y] += count
    D = tuple(tuple(N[x][y] - N[y][x] for y in range(m)) for x in range(m))
    return PairwiseTallies(tuple(map(tuple, N)), D)


def positional_scores(profile: Profile, sv: ScoreVector, normalized: bool = False) -> dict:
    """Score of every candidate under positional vector ``sv``."""
    require_kind(profile, RANKED)
    if len(sv) != profile.m:
        raise ProfileError(f"score vector has length {len(sv)}, election has m={profile.m}")
    alphas = sv.normalized if normalized else sv.alphas
    scores = [0] * profile.m
    for order, count in profile.entries:
        for pos, x in enumerate(order):
            if alphas[pos]:
                scores[x] += alphas[pos] * count
    return {x: _as_number(s) for x, s in enumerate(scores)}


def approval_scores(profile: Profile) -> dict:
    require_kind(profile, APPROVAL)
    scores = dict.fromkeys(range(profile.m), 0)
    for approved, count in profile.entries:
        for x in approved:
            scores[x] += count
    return scores


def top_k_counts(profile: Profile, k: int) -> dict:
    """Number of voters ranking each candidate within their first ``k`` positions."""
    require_kind(profile, RANKED)
    if not 1 <= k <= profile.m:
        raise ProfileError(f"k must be in 1..{profile.m}, got {k}")
    scores = dict.fromkeys(range(profile.m), 0)
    for order, count in profile.entries:
        for x in order[:k]:
            scores[x] += count
    return scores


def restricted_plurality(profile: Profile, alive: Iterable[int]) -> dict:
    """Plurality scores after deleting every candidate outside ``alive`` from each vote."""
    require_kind(profile, RANKED)
    alive = frozenset(alive)
    if not alive:
        raise ProfileError("alive set must be non-empty")
    if any(not 0 <= x < profile.m for x in alive):
        raise ProfileError("alive set has ids outside the election")
    scores = dict.fromkeys(sorted(alive), 0)
    for order, count in profile.entries:
        for x in order:
            if x in alive:
                scores[x] += count
                break
    return scores
