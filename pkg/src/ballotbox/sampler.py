"""Sampling-based winner prediction.

Votes are drawn uniformly with replacement and the rule is run on the sample.
Because the draws are i.i.d. over the distinct ballots with probability
``count / n``, the sampled multiset is drawn directly as one multinomial vector
over the profile's entries, which costs O(#distinct ballots) instead of O(ell).

Sample sizes come from Chernoff-style bounds with explicit constants. Each
formula estimates the quantity the rule's structural gap depends on (scores,
pairwise margins, top-k counts, restricted plurality scores, or ballot
frequencies) to within a fraction of ``eps * n`` simultaneously for every
candidate, and then union-bounds the failure probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from .profile import Profile, ProfileError
from .rules import (
    APPROVAL_RULE,
    BORDA,
    BUCKLIN,
    COPELAND,
    GENERIC,
    KAPPROVAL,
    MAXIMIN,
    PLURALITY,
    RUNOFF,
    SCORING,
    STV,
    RuleSpec,
    evaluate_rule,
    parse_rule,
)

SEED_BITS = 64


class SampleSizeError(ValueError):
    pass


def exact(value) -> Fraction:
    """Decimal strings, ints and floats to an exact rational (floats via their
    shortest decimal repr, so ``0.1`` means one tenth)."""
    if isinstance(value, float):
        value = repr(value)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise SampleSizeError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class SampleSizeRequest:
    rule: RuleSpec
    epsilon: Fraction
    delta: Fraction
    m: int

    def __post_init__(self):
        eps, delta = exact(self.epsilon), exact(self.delta)
        if not 0 < eps <= 1:
            raise SampleSizeError(f"epsilon must lie in (0, 1], got {eps}")
        if not 0 < delta < 1:
            raise SampleSizeError(f"delta must lie in (0, 1), got {delta}")
        if self.m < 2:
            raise SampleSizeError("need at least two candidates")
        if self.rule.name == KAPPROVAL and not 1 <= self.rule.k <= self.m - 1:
            raise SampleSizeError(f"k-approval needs 1 <= k <= m-1, got k={self.rule.k}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "delta", delta)


def _ceil_log2(m: int) -> int:
    return (m - 1).bit_length()


def sample_size_bound(req: SampleSizeRequest) -> tuple:
    """Unrounded sample size and the formula that produced it."""
    eps2 = float(req.epsilon) ** 2
    delta = float(req.delta)
    m = req.m
    name = req.rule.name
    if name in (PLURALITY, KAPPROVAL):
        k = 1 if name == PLURALITY else req.rule.k
        return 48 / eps2 * math.log(2 * k / delta), f"48/eps^2 * ln(2k/delta), k={k}"
    if name in (SCORING, BORDA):
        return 8 / eps2 * math.log(2 * m / delta), "8/eps^2 * ln(2m/delta)"
    if name == APPROVAL_RULE:
        return 2 / eps2 * math.log(2 * m / delta), "2/eps^2 * ln(2m/delta)"
    if name in (MAXIMIN, BUCKLIN):
        return 8 / eps2 * math.log(4 * m * m / delta), "8/eps^2 * ln(4m^2/delta)"
    if name == COPELAND:
        L = _ceil_log2(m) + 1
        return (
            50 * L * L / eps2 * math.log(4 * m * m / delta),
            f"50(ceil(log2 m)+1)^2/eps^2 * ln(4m^2/delta), ceil(log2 m)+1={L}",
        )
    if name == RUNOFF:
        return 75 / eps2 * math.log(8 / delta), "75/eps^2 * ln(8/delta)"
    if name == STV:
        return (
            3 * m * m / eps2 * ((m + 1) * math.log(2) + math.log(2 * m / delta)),
            "3m^2/eps^2 * ((m+1) ln 2 + ln(2m/delta))",
        )
    if name == GENERIC:
        f = math.factorial(m)
        return 2 * f * f / eps2 * math.log(2 * f / delta), "2(m!)^2/eps^2 * ln(2 m!/delta)"
    raise SampleSizeError(f"no sample size formula for rule {req.rule}")


def sample_size(req: SampleSizeRequest) -> int:
    bound, _ = sample_size_bound(req)
    return max(1, math.ceil(bound))


# --- seeds and sampling ---------------------------------------------------------------


def derive_seed(master: int, index: int) -> int:
    """64-bit seed for stream ``index`` under ``master``; independent of call order."""
    state = np.random.SeedSequence([master, index]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def _rng(seed: int) -> np.random.Generator:
    if not 0 <= seed < 2**SEED_BITS:
        raise ValueError(f"seed must be an unsigned {SEED_BITS}-bit integer")
    return np.random.default_rng(seed)


def sample_counts(counts, ell: int, rng: np.random.Generator) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    return rng.multinomial(ell, counts / counts.sum())


def sample_votes(profile: Profile, ell: int, seed: int) -> Profile:
    """``ell`` votes drawn uniformly with replacement, as a canonical profile."""
    if ell < 1:
        raise ProfileError("sample size must be at least 1")
    drawn = sample_counts(profile.counts, ell, _rng(seed))
    entries = tuple((b, int(c)) for b, c in zip(profile.ballots, drawn) if c)
    return Profile._trusted(profile.m, profile.kind, entries, profile.names)


@dataclass(frozen=True)
class PredictionOutcome:
    predicted: int
    sample_size: int
    seed: int


def predict_winner(profile: Profile, rule: RuleSpec, ell: int, seed: int) -> PredictionOutcome:
    sample = sample_votes(profile, ell, seed)
    return PredictionOutcome(evaluate_rule(sample, rule).winner, ell, seed)


# --- l-infinity estimation ------------------------------------------------------------------


def categorical_source(probs) -> Callable:
    """Source drawing symbol ``i`` with probability ``probs[i]``."""
    p = np.asarray([float(x) for x in probs], dtype=np.float64)
    p = p / p.sum()

    def draw(rng: np.random.Generator, size: int):
        return rng.choice(len(p), size=size, p=p)

    return draw


def estimate_linf(source: Callable, epsilon, delta, seed: int, ell: Optional[int] = None) -> Fraction:
    """Largest empirical symbol frequency over plurality-sized sample.

    ``source(rng, size)`` must return ``size`` i.i.d. hashable symbols.
    """
    if ell is None:
        ell = sample_size(SampleSizeRequest(RuleSpec(PLURALITY), epsilon, delta, 2))
    symbols = np.asarray(source(_rng(seed), ell))
    _, freq = np.unique(symbols, return_counts=True)
    return Fraction(int(freq.max()), ell)


def rule_request(rule: Union[RuleSpec, str], epsilon, delta, m: int) -> SampleSizeRequest:
    if isinstance(rule, str):
        rule = parse_rule(rule)
    return SampleSizeRequest(rule, exact(epsilon), exact(delta), m)
