"""Command-line interface: ``ballotbox <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 data error (bad profile, config,
parameters outside a construction's range, search budget exhausted).
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import adversary
from .experiment import ConfigError, fmt_rational, load_config, rows_to_csv, run_experiment
from .io import format_ballot, read_manifest, read_profile, write_family
from .margin import COWINNER, RESOLUTE, CertificateError, SearchBudgetExceeded, brute_force_mov, certify
from .profile import Profile, ProfileError
from .rules import RuleError, evaluate_rule, parse_rule
from .sampler import SampleSizeError, exact, predict_winner, rule_request, sample_size, sample_size_bound

EXIT_DATA = 3


class DataError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return exact(text)
    except SampleSizeError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return fmt_rational(value)
    if isinstance(value, float) and value == float("inf"):
        return "inf"
    if isinstance(value, dict):
        return " ".join(f"{k}={_fmt(v)}" for k, v in value.items()) or "-"
    if isinstance(value, (tuple, list)):
        return "(" + ",".join(_fmt(v) for v in value) + ")"
    if value is None:
        return "-"
    return str(value)


def _name(profile: Profile, c: int) -> str:
    return f"{profile.names[c]} ({c})"


def _ballots(ballots) -> str:
    return "[" + " ".join(format_ballot(b) for b in ballots) + "]"


# --- subcommands -----------------------------------------------------------------------


def cmd_winner(args) -> list:
    profile = read_profile(args.input)
    result = evaluate_rule(profile, args.rule)
    trace = [f"{e.action} {_fmt(e.candidates)} -> {e.chosen}" for e in result.trace]
    return [
        f"rule: {args.rule}",
        f"winner: {_name(profile, result.winner)}",
        "scores: " + " ".join(f"{profile.names[c]}={_fmt(s)}" for c, s in result.scores.items()),
        "trace: " + ("; ".join(trace) if trace else "-"),
    ]


def cmd_mov(args) -> list:
    profile = read_profile(args.input)
    result = brute_force_mov(profile, args.rule, args.cap, node_limit=args.node_limit, semantics=args.semantics)
    out = [f"rule: {args.rule}", f"semantics: {args.semantics}", f"cap: {args.cap}"]
    if result.exceeded:
        return out + [f"mov: > {args.cap}", f"nodes: {result.nodes}"]
    removed, added = result.witness
    return out + [
        f"mov: {result.mov}",
        f"witness: remove {_ballots(removed)} add {_ballots(added)}",
        f"new_winner: {_name(profile, result.new_winner)}",
        f"nodes: {result.nodes}",
    ]


def cmd_certify(args) -> list:
    profile = read_profile(args.input)
    cert = certify(profile, args.rule, args.epsilon)
    return [
        f"rule: {cert.rule}",
        f"kind: {cert.kind}",
        f"winner: {_name(profile, cert.winner)}",
        f"value: {_fmt(cert.value)}",
        f"threshold: {_fmt(cert.threshold)}",
        f"holds: {str(cert.holds).lower()}",
    ] + [f"{k}: {_fmt(v)}" for k, v in cert.details.items()]


def cmd_sample_size(args) -> list:
    req = rule_request(args.rule, args.epsilon, args.delta, args.m)
    _, formula = sample_size_bound(req)
    return [f"ell: {sample_size(req)}", f"formula: {formula}"]


def cmd_predict(args) -> list:
    profile = read_profile(args.input)
    ell = args.ell or sample_size(rule_request(args.rule, args.epsilon, args.delta, profile.m))
    out = predict_winner(profile, args.rule, ell, args.seed)
    return [
        f"rule: {args.rule}",
        f"predicted: {_name(profile, out.predicted)}",
        f"sample_size: {out.sample_size}",
        f"seed: {out.seed}",
    ]


def cmd_gen(args) -> list:
    fam = args.family
    need = {"kapproval": ("m", "k"), "borda": ("m",), "bucklin": ("m",)}.get(fam, ())
    missing = [f"--{p}" for p in need if getattr(args, p) is None]
    if missing:
        raise DataError(f"family {fam} needs {' '.join(missing)}")
    params = {"epsilon": args.epsilon, "n": args.n}
    params.update({p: getattr(args, p) for p in need})
    try:
        family = adversary.build_family(fam, **params)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    written = write_family(family, args.out)
    return [f"wrote {p}" for p in written]


def cmd_divergence(args) -> list:
    manifest = read_manifest(args.family_dir)
    params = dict(manifest["params"])
    params["n"] = 0
    try:
        family = adversary.build_family(manifest["family"], **params)
    except (KeyError, ValueError) as exc:
        raise DataError(f"cannot rebuild family from manifest: {exc}") from exc
    report = adversary.family_divergence_report(family)
    lines = [f"family: {family.family}", f"members: {len(family.members)}"]
    lines += [f"kl[{i}]: {v:.10g}" for i, v in enumerate(report["kl"])]
    lines += [f"max_kl: {report['max_kl']:.10g}", f"js: {report['js']:.10g}"]
    return lines


def cmd_experiment(args) -> list:
    config = load_config(args.config)
    rows = run_experiment(config)
    text = rows_to_csv(rows, config.timing)
    output = args.output or config.output
    if output is None or output == "-":
        return text.rstrip("\n").split("\n")
    path = Path(output)
    if not path.is_absolute() and args.output is None:
        path = config.base_dir / path
    path.write_text(text, encoding="utf-8")
    return [f"wrote {path} ({len(rows)} rows)"]


# --- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ballotbox", description="Sampling-based election winner prediction workbench."
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    rule_help = "rule name, e.g. plurality, kapproval:3, borda, copeland:1/2, scoring:3,1,0"

    p = add("winner", cmd_winner, "Print the winner, scores and tie-break trace.")
    p.add_argument("--rule", required=True, help=rule_help)
    p.add_argument("--input", required=True, help="profile file")

    p = add("mov", cmd_mov, "Exact margin of victory by exhaustive search (small elections).")
    p.add_argument("--rule", required=True, help=rule_help)
    p.add_argument("--input", required=True)
    p.add_argument("--cap", type=int, required=True, help="largest margin to search for")
    p.add_argument("--semantics", choices=(RESOLUTE, COWINNER), default=RESOLUTE)
    p.add_argument("--node-limit", type=int, default=5_000_000)

    p = add("certify", cmd_certify, "Gap certificate for the rule at margin epsilon*n.")
    p.add_argument("--rule", required=True, help=rule_help)
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--input", required=True)

    p = add("sample-size", cmd_sample_size, "Sample size for an (epsilon, delta) prediction.")
    p.add_argument("--rule", required=True, help=rule_help)
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--delta", type=_rational, required=True)
    p.add_argument("--m", type=int, required=True, help="number of candidates")
    p.add_argument("--k", type=int, help="k for kapproval (overrides the rule parameter)")

    p = add("predict", cmd_predict, "Predict the winner from a uniform sample of votes.")
    p.add_argument("--rule", required=True, help=rule_help)
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--delta", type=_rational, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--ell", type=int, help="override the sample size")

    p = add("gen", cmd_gen, "Write an adversarial family: one profile per member plus a manifest.")
    p.add_argument("--family", choices=("two", "kapproval", "borda", "bucklin"), required=True)
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--n", type=int, required=True, help="voters per realized member")
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--out", required=True, help="output directory")

    p = add("divergence", cmd_divergence, "KL and generalized JS divergences of a generated family.")
    p.add_argument("--family-dir", required=True)

    p = add("experiment", cmd_experiment, "Run a Monte-Carlo experiment config and write CSV.")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="CSV path ('-' for stdout); overrides the config")
    return parser


DATA_ERRORS = (
    ProfileError, RuleError, CertificateError, SampleSizeError, ConfigError,
    SearchBudgetExceeded, DataError, adversary.InfiniteDivergence, OSError,
)


def _finish_args(parser: argparse.ArgumentParser, args) -> None:
    """Checks that need more than one argument; usage errors exit with status 2."""
    if getattr(args, "rule", None) is not None:
        text = args.rule
        if getattr(args, "k", None) is not None:
            if text.partition(":")[0].lower() not in ("kapproval", "k-approval"):
                parser.error("--k only applies to kapproval")
            if ":" not in text:
                text = f"{text}:{args.k}"
        try:
            args.rule = parse_rule(text)
        except RuleError as exc:
            parser.error(str(exc))
    if getattr(args, "n", None) is not None and args.n < 1:
        parser.error("--n must be at least 1")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _finish_args(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        lines = args.func(args)
    except DATA_ERRORS as exc:
        print(f"ballotbox: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    for line in lines:
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
