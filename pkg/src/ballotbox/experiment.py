"""Monte-Carlo error-rate experiments.

A config file holds flat ``key = value`` lines::

    profile = p0.txt                 # or: generator = two:epsilon=0.1,n=1000,which=0
    rule = plurality
    epsilon = 0.1
    delta = 0.05
    schedule = formula               # or a list: 1, 10, 100
    trials = 1000
    seed = 12345
    output = results.csv
    timing = true                    # false writes wall_seconds as 0 for byte-stable output

Trial ``t`` at schedule point ``p`` uses seed ``derive_seed(seed, p * trials + t)``,
so results do not depend on how trials are spread across workers.
"""

from __future__ import annotations

import csv
import io as _io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from . import adversary
from .io import read_profile
from .profile import Profile
from .rules import GENERIC, RuleSpec, evaluate_rule, parse_rule
from .sampler import derive_seed, exact, predict_winner, rule_request, sample_size

CSV_HEADER = (
    "rule", "m", "n", "epsilon", "delta", "ell", "trials", "errors",
    "error_rate", "wall_seconds", "seed",
)
FORMULA = "formula"
THREADS_ENV = "BALLOTBOX_THREADS"


class ConfigError(ValueError):
    pass


def fmt_rational(q: Fraction) -> str:
    """Terminating decimals as decimals (``1/10`` -> ``0.1``), everything else as ``p/q``."""
    q = Fraction(q)
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = 0
    while (q * 10**digits).denominator != 1:
        digits += 1
    scaled = abs(q.numerator * 10**digits // q.denominator)
    sign = "-" if q < 0 else ""
    if not digits:
        return f"{sign}{scaled}"
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


@dataclass
class ExperimentConfig:
    rule: RuleSpec
    epsilon: Fraction
    delta: Fraction
    trials: int
    seed: int
    schedule: Union[str, tuple] = FORMULA
    profile: Optional[str] = None
    generator: Optional[str] = None
    output: Optional[str] = None
    timing: bool = True
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        if (self.profile is None) == (self.generator is None):
            raise ConfigError("give exactly one of 'profile' or 'generator'")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0 < self.epsilon <= 1:
            raise ConfigError("epsilon must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.schedule != FORMULA:
            if not self.schedule or any(ell < 1 for ell in self.schedule):
                raise ConfigError("schedule must be 'formula' or a non-empty list of sizes >= 1")

    def load_profile(self) -> Profile:
        if self.profile is not None:
            path = Path(self.profile)
            return read_profile(path if path.is_absolute() else self.base_dir / path)
        return generate_profile(self.generator)

    def sizes(self, m: int) -> tuple:
        if self.schedule == FORMULA:
            return (sample_size(rule_request(self.rule, self.epsilon, self.delta, m)),)
        return tuple(self.schedule)


_BOOLS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_config(text: str, base_dir: Union[str, Path] = ".") -> ExperimentConfig:
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value' at line {lineno}")
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} at line {lineno}")
        raw[key] = value
    known = {"profile", "generator", "rule", "epsilon", "delta", "schedule", "trials", "seed", "output", "timing"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("rule", "epsilon", "delta", "trials", "seed"):
        if key not in raw:
            raise ConfigError(f"missing config key {key!r}")
    try:
        schedule: Union[str, tuple] = raw.get("schedule", FORMULA)
        if schedule.lower() == FORMULA:
            schedule = FORMULA
        else:
            schedule = tuple(int(s) for s in schedule.replace(",", " ").split())
        timing = _BOOLS[raw.get("timing", "true").lower()]
        return ExperimentConfig(
            rule=parse_rule(raw["rule"]),
            epsilon=exact(raw["epsilon"]),
            delta=exact(raw["delta"]),
            trials=int(raw["trials"]),
            seed=int(raw["seed"]),
            schedule=schedule,
            profile=raw.get("profile"),
            generator=raw.get("generator"),
            output=raw.get("output"),
            timing=timing,
            base_dir=Path(base_dir),
        )
    except KeyError as exc:
        raise ConfigError(f"bad boolean for timing: {raw.get('timing')!r}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), path.parent)


def generate_profile(spec: str) -> Profile:
    """Profile from ``family:key=value,...``.

    ``two`` takes epsilon, n, which; the other families take their
    construction parameters plus n and ``member`` (index of the member to use).
    """
    family, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"bad generator parameter {item!r}")
        params[key.strip()] = value.strip()
    family = family.strip()
    try:
        if family == "two":
            return adversary.gen_two_candidate(params["epsilon"], int(params["n"]), int(params.get("which", 0)))
        member = int(params.pop("member", 0))
        fam = adversary.build_family(family, **params)
        if not fam.profiles:
            raise ConfigError("generator needs n >= 1")
        return fam.profiles[member]
    except KeyError as exc:
        raise ConfigError(f"generator {family!r} is missing parameter {exc}") from exc
    except IndexError as exc:
        raise ConfigError(f"generator {family!r} has no member {member}") from exc


# --- running -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRow:
    rule: str
    m: int
    n: int
    epsilon: Fraction
    delta: Fraction
    ell: int
    trials: int
    errors: int
    wall_seconds: float
    seed: int

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    def as_csv_fields(self, timing: bool = True) -> list:
        return [
            self.rule, self.m, self.n, fmt_rational(self.epsilon), fmt_rational(self.delta),
            self.ell, self.trials, self.errors, repr(self.error_rate),
            f"{self.wall_seconds:.6f}" if timing else "0", self.seed,
        ]


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


def count_errors(profile: Profile, rule: RuleSpec, ell: int, truth: int, master: int, first: int, last: int) -> int:
    """Mispredictions among trials with global indices ``first .. last-1``."""
    return sum(
        predict_winner(profile, rule, ell, derive_seed(master, i)).predicted != truth
        for i in range(first, last)
    )


def _chunks(first: int, last: int, parts: int) -> list:
    size, extra = divmod(last - first, parts)
    out, lo = [], first
    for j in range(parts):
        hi = lo + size + (j < extra)
        if hi > lo:
            out.append((lo, hi))
        lo = hi
    return out


def run_trials(profile: Profile, rule: RuleSpec, ell: int, truth: int, master: int,
               first: int, last: int, workers: int = 1) -> int:
    # generic rules wrap arbitrary callables, which may not pickle
    if workers <= 1 or last - first < 2 * workers or rule.name == GENERIC:
        return count_errors(profile, rule, ell, truth, master, first, last)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(count_errors, profile, rule, ell, truth, master, lo, hi)
            for lo, hi in _chunks(first, last, workers)
        ]
        return sum(f.result() for f in futures)


def run_experiment(config: ExperimentConfig, profile: Optional[Profile] = None,
                   workers: Optional[int] = None) -> list:
    profile = profile if profile is not None else config.load_profile()
    workers = worker_count() if workers is None else workers
    truth = evaluate_rule(profile, config.rule).winner
    rows = []
    for point, ell in enumerate(config.sizes(profile.m)):
        first = point * config.trials
        start = time.perf_counter()
        errors = run_trials(profile, config.rule, ell, truth, config.seed,
                            first, first + config.trials, workers)
        rows.append(ExperimentRow(
            str(config.rule), profile.m, profile.n, config.epsilon, config.delta, ell,
            config.trials, errors, time.perf_counter() - start, config.seed,
        ))
    return rows


def rows_to_csv(rows: Sequence[ExperimentRow], timing: bool = True) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.as_csv_fields(timing))
    return buf.getvalue()


def write_csv(rows: Sequence[ExperimentRow], path: Union[str, Path], timing: bool = True) -> None:
    Path(path).write_text(rows_to_csv(rows, timing), encoding="utf-8")
