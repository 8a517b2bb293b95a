import pytest
from hypothesis import given

from ballotbox.io import ParseError, parse_profile, read_manifest, read_profile, write_family, write_profile
from ballotbox.adversary import gen_kapproval_family
from ballotbox.profile import APPROVAL, Profile
from conftest import approval_profiles, p0, ranked_profiles

HEADER = "election 3 ranked\ncandidate 0 a\ncandidate 1 b\ncandidate 2 c\nballots\n"


def test_fixture(data_dir):
    prof = read_profile(data_dir / "p0.txt")
    assert prof == p0()
    assert prof.n == 3 and len(prof.entries) == 2


@pytest.mark.parametrize("body,message,line", [
    ("1: 0>0>1\n", "duplicate candidate", 6),
    ("1: 0>1>3\n", "unknown candidate id 3", 6),
    ("1: 0>1\n", "ranking lists 2 of 3", 6),
    ("0: 0>1>2\n", "at least 1", 6),
    ("1: {0,1}\n", "does not match election kind", 6),
    ("x: 0>1>2\n", "expected '<count>: <ballot>'", 6),
    ("99999999999999999999: 0>1>2\n", "count overflow", 6),
])
def test_parse_errors(body, message, line):
    with pytest.raises(ParseError, match=message) as err:
        parse_profile(HEADER + body)
    assert err.value.line == line
    assert f"at line {line}" in str(err.value)


def test_structural_errors():
    with pytest.raises(ParseError, match="no ballots"):
        parse_profile(HEADER)
    with pytest.raises(ParseError, match="duplicate candidate id"):
        parse_profile("election 2 ranked\ncandidate 0 a\ncandidate 0 b\nballots\n1: 0>1\n")
    with pytest.raises(ParseError, match="missing candidate"):
        parse_profile("election 2 ranked\ncandidate 0 a\nballots\n1: 0>1\n")
    with pytest.raises(ParseError, match="election"):
        parse_profile("elections 2 ranked\n")
    with pytest.raises(ParseError):
        parse_profile("")


def test_comments_and_merging():
    text = "# hi\n" + HEADER + "1: 0>1>2   # first\n\n2: 0 > 1 > 2\n"
    prof = parse_profile(text)
    assert prof.entries == (((0, 1, 2), 3),)


def test_unanimous_single_line():
    text = write_profile(Profile.from_counts(3, {(2, 1, 0): 5}))
    assert text.splitlines()[-1] == "5: 2>1>0"
    assert sum(1 for line in text.splitlines() if ":" in line) == 1


def test_approval_round_trip():
    prof = Profile.from_counts(3, {frozenset(): 2, frozenset({0, 2}): 1}, APPROVAL, ("x", "y", "z"))
    text = write_profile(prof)
    assert "2: {}" in text and "1: {0,2}" in text
    assert parse_profile(text) == prof


def test_names_with_spaces():
    prof = Profile.from_ballots(2, [(1, 0)], names=("Ada Lovelace", "Bob"))
    assert parse_profile(write_profile(prof)).names == ("Ada Lovelace", "Bob")


@given(ranked_profiles(min_m=1, max_m=5, max_n=50))
def test_round_trip_ranked(prof):
    text = write_profile(prof)
    back = parse_profile(text)
    assert back == prof and back.names == prof.names
    assert write_profile(back) == text


@given(approval_profiles(max_m=5, max_n=50))
def test_round_trip_approval(prof):
    assert parse_profile(write_profile(prof)) == prof


def test_family_directory(tmp_path):
    fam = gen_kapproval_family(5, 2, "0.1", 60)
    written = write_family(fam, tmp_path)
    assert len(written) == 4
    man = read_manifest(tmp_path)
    assert man["family"] == "kapproval"
    assert man["params"] == {"m": "5", "k": "2", "epsilon": "1/10", "n": "60"}
    assert [w for _, w in man["members"]] == [0, 1, 2]
    for (name, _), prof in zip(man["members"], fam.profiles):
        assert read_profile(tmp_path / name) == prof
