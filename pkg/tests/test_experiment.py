import csv
import io
import time
from fractions import Fraction

import pytest

from ballotbox.experiment import (
    CSV_HEADER, ConfigError, ExperimentConfig, fmt_rational, generate_profile, parse_config,
    rows_to_csv, run_experiment, run_trials, worker_count,
)
from ballotbox.profile import Profile
from ballotbox.rules import RuleSpec

BASE = """
generator = two:epsilon=0.1,n=1000,which=0
rule = plurality
epsilon = 0.1
delta = 0.05
trials = {trials}
seed = 42
schedule = {schedule}
timing = false
"""


def config(trials=200, schedule="1, 10, 100"):
    return parse_config(BASE.format(trials=trials, schedule=schedule))


def test_parse_config():
    cfg = config()
    assert cfg.schedule == (1, 10, 100)
    assert cfg.epsilon == Fraction(1, 10) and cfg.rule == RuleSpec.plurality()
    assert not cfg.timing
    assert config(schedule="formula").sizes(2) == (17707,)


@pytest.mark.parametrize("edit", [
    lambda t: t.replace("trials = 200", "trials = 0"),
    lambda t: t.replace("epsilon = 0.1\n", "epsilon = 2\n"),
    lambda t: t.replace("rule = plurality", "rule = kemeny"),
    lambda t: t + "colour = red\n",
    lambda t: t + "seed = 3\n",
    lambda t: t.replace("schedule = 1, 10, 100", "schedule = 0"),
    lambda t: t + "profile = x.txt\n",
    lambda t: t.replace("timing = false", "timing = maybe"),
])
def test_config_errors(edit):
    with pytest.raises(ConfigError):
        parse_config(edit(BASE.format(trials=200, schedule="1, 10, 100")))


def test_generator_specs():
    p = generate_profile("two:epsilon=0.1,n=10,which=1")
    assert dict(p.entries)[(1, 0)] == 6
    assert generate_profile("kapproval:m=5,k=2,epsilon=0.1,n=30,member=2").n == 30
    with pytest.raises(ConfigError):
        generate_profile("two:n=10")
    with pytest.raises(ConfigError):
        generate_profile("borda:m=4,epsilon=0.1,n=40,member=9")


def test_unanimous_zero_error():
    cfg = config()
    prof = Profile.from_counts(3, {(2, 0, 1): 50})
    rows = run_experiment(cfg, profile=prof, workers=1)
    assert [r.errors for r in rows] == [0, 0, 0]


def test_rates_and_csv():
    rows = run_experiment(config(trials=10_000, schedule="1"), workers=1)
    assert abs(rows[0].error_rate - 0.4) <= 0.02
    text = rows_to_csv(rows, timing=False)
    parsed = list(csv.reader(io.StringIO(text)))
    assert tuple(parsed[0]) == CSV_HEADER
    assert parsed[1][:8] == ["plurality", "2", "1000", "0.1", "0.05", "1", "10000", str(rows[0].errors)]
    assert parsed[1][9] == "0" and parsed[1][10] == "42"


def test_error_rate_decreases_with_ell():
    rows = run_experiment(config(trials=2000, schedule="10, 100, 1000"), workers=1)
    rates = [r.error_rate for r in rows]
    assert rates[0] >= rates[1] - 0.02 >= rates[2] - 0.04
    assert rates[2] <= 0.01


def test_workers_do_not_change_results(monkeypatch):
    cfg = config(trials=400)
    serial = rows_to_csv(run_experiment(cfg, workers=1), timing=False)
    parallel = rows_to_csv(run_experiment(cfg, workers=3), timing=False)
    assert serial == parallel
    monkeypatch.setenv("BALLOTBOX_THREADS", "2")
    assert worker_count() == 2
    monkeypatch.setenv("BALLOTBOX_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("BALLOTBOX_THREADS", "lots")
    with pytest.raises(ConfigError):
        worker_count()


def test_fmt_rational():
    assert fmt_rational(Fraction(1, 10)) == "0.1"
    assert fmt_rational(Fraction(1, 20)) == "0.05"
    assert fmt_rational(Fraction(1, 3)) == "1/3"
    assert fmt_rational(Fraction(7)) == "7"


def test_wall_time_scales_with_trials():
    # time per prediction is roughly flat, so total time should track the trial count
    prof = generate_profile("two:epsilon=0.1,n=1000")
    rule = RuleSpec.plurality()
    run_trials(prof, rule, 50, 0, 1, 0, 500)
    timings = {}
    for trials in (2000, 6000):
        best = float("inf")
        for _ in range(3):
            start = time.perf_counter()
            run_trials(prof, rule, 50, 0, 1, 0, trials)
            best = min(best, time.perf_counter() - start)
        timings[trials] = best
    ratio = timings[6000] / timings[2000]
    assert 3 * 0.7 <= ratio <= 3 * 1.3


def test_requires_one_source():
    with pytest.raises(ConfigError):
        ExperimentConfig(RuleSpec.plurality(), Fraction(1, 10), Fraction(1, 20), 5, 1)
