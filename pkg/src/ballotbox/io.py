"""Line-oriented profile files.

    # comment
    election 3 ranked
    candidate 0 a
    candidate 1 b
    candidate 2 c
    ballots
    2: 0>1>2
    1: 2>0>1

Approval ballots are written ``<count>: {0,2}`` (``{}`` for the empty ballot).
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Union

from .profile import APPROVAL, KINDS, Profile, ProfileError

MAX_COUNT = 2**63 - 1

_BALLOT_LINE = re.compile(r"^(\d+)\s*:\s*(.*)$")


class ParseError(ProfileError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"{message} at line {line}" if line else message)


def _ids(text: str, sep: str, m: int, lineno: int) -> list:
    parts = [p.strip() for p in text.split(sep)]
    out = []
    for p in parts:
        if not p.isdigit():
            raise ParseError(f"bad candidate id {p!r}", lineno)
        c = int(p)
        if c >= m:
            raise ParseError(f"unknown candidate id {c}", lineno)
        if c in out:
            raise ParseError("duplicate candidate", lineno)
        out.append(c)
    return out


def _parse_ballot(text: str, kind: str, m: int, lineno: int):
    text = text.strip()
    is_set = text.startswith("{")
    if is_set != (kind == APPROVAL):
        raise ParseError(f"ballot {text!r} does not match election kind {kind}", lineno)
    if kind == APPROVAL:
        if not text.endswith("}"):
            raise ParseError(f"unterminated approval set {text!r}", lineno)
        inner = text[1:-1].strip()
        return frozenset(_ids(inner, ",", m, lineno)) if inner else frozenset()
    order = _ids(text, ">", m, lineno)
    if len(order) != m:
        raise ParseError(f"ranking lists {len(order)} of {m} candidates", lineno)
    return tuple(order)


def parse_profile(text: str) -> Profile:
    lines = [
        (i, line.split("#", 1)[0].strip()) for i, line in enumerate(text.splitlines(), 1)
    ]
    lines = [(i, s) for i, s in lines if s]
    if not lines:
        raise ParseError("empty profile file")

    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "election" or not parts[1].isdigit():
        raise ParseError("expected 'election <m> <ranked|approval>'", lineno)
    m, kind = int(parts[1]), parts[2]
    if kind not in KINDS:
        raise ParseError(f"unknown ballot kind {kind!r}", lineno)
    if m < 1:
        raise ParseError("an election needs at least one candidate", lineno)

    names: dict = {}
    pos = 1
    while pos < len(lines) and lines[pos][1].startswith("candidate"):
        lineno, s = lines[pos]
        parts = s.split(None, 2)
        if len(parts) != 3 or parts[0] != "candidate" or not parts[1].isdigit():
            raise ParseError("expected 'candidate <id> <name>'", lineno)
        c = int(parts[1])
        if c >= m:
            raise ParseError(f"unknown candidate id {c}", lineno)
        if c in names:
            raise ParseError(f"duplicate candidate id {c}", lineno)
        if parts[2] in names.values():
            raise ParseError(f"duplicate candidate name {parts[2]!r}", lineno)
        names[c] = parts[2]
        pos += 1
    if len(names) != m:
        missing = sorted(set(range(m)) - set(names))
        raise ParseError(f"missing candidate declarations for ids {missing}", lines[pos - 1][0])

    if pos >= len(lines) or lines[pos][1] != "ballots":
        raise ParseError("expected 'ballots'", lines[pos][0] if pos < len(lines) else lines[-1][0])
    pos += 1

    counts: dict = {}
    for lineno, s in lines[pos:]:
        match = _BALLOT_LINE.match(s)
        if not match:
            raise ParseError("expected '<count>: <ballot>'", lineno)
        count = int(match.group(1))
        if count < 1:
            raise ParseError("ballot count must be at least 1", lineno)
        if count > MAX_COUNT:
            raise ParseError("count overflow", lineno)
        ballot = _parse_ballot(match.group(2), kind, m, lineno)
        total = counts.get(ballot, 0) + count
        if total > MAX_COUNT:
            raise ParseError("count overflow", lineno)
        counts[ballot] = total
    if not counts:
        raise ParseError("no ballots")
    return Profile.from_counts(m, counts, kind, tuple(names[c] for c in range(m)))


def format_ballot(ballot) -> str:
    if isinstance(ballot, frozenset):
        return "{" + ",".join(str(c) for c in sorted(ballot)) + "}"
    return ">".join(str(c) for c in ballot)


def write_profile(profile: Profile) -> str:
    for name in profile.names:
        if not name or name != name.strip() or "\n" in name or "#" in name:
            raise ProfileError(f"candidate name {name!r} cannot be written")
    lines = [f"election {profile.m} {profile.kind}"]
    lines += [f"candidate {c} {name}" for c, name in enumerate(profile.names)]
    lines.append("ballots")
    lines += [f"{count}: {format_ballot(b)}" for b, count in profile.entries]
    return "\n".join(lines) + "\n"


def read_profile(path: Union[str, Path]) -> Profile:
    return parse_profile(Path(path).read_text(encoding="utf-8"))


def save_profile(profile: Profile, path: Union[str, Path]) -> None:
    Path(path).write_text(write_profile(profile), encoding="utf-8")


# --- adversarial family directories ----------------------------------------------------

MANIFEST = "manifest.txt"


def write_family(family, directory: Union[str, Path]) -> list:
    """One profile file per realized member plus ``manifest.txt``; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"family {family.family}"]
    lines += [f"param {k} {v}" for k, v in family.params.items()]
    written = []
    for i, (profile, w) in enumerate(zip(family.profiles, family.winners)):
        name = f"member_{i}.txt"
        save_profile(profile, directory / name)
        written.append(directory / name)
        lines.append(f"member {i} {name} {w}")
    (directory / MANIFEST).write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(directory / MANIFEST)
    return written


def read_manifest(directory: Union[str, Path]) -> dict:
    """``{"family": str, "params": dict, "members": [(file, intended winner), ...]}``."""
    path = Path(directory) / MANIFEST
    out: dict = {"family": None, "params": {}, "members": []}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] == "family" and len(parts) == 2:
            out["family"] = parts[1]
        elif parts[0] == "param" and len(parts) == 3:
            out["params"][parts[1]] = parts[2]
        elif parts[0] == "member" and len(parts) == 4 and parts[3].isdigit():
            out["members"].append((parts[2], int(parts[3])))
        else:
            raise ParseError(f"bad manifest line {raw!r}", lineno)
    if out["family"] is None:
        raise ParseError(f"{path} names no family")
    return out
