import pytest

from cbpp import Solution
from cbpp.errors import FormatError
from cbpp.fileio import (format_instance, format_solution, instance_comments, parse_bpp_bins, parse_bpp_instance,
                         parse_instance, parse_solution, read_instance, write_instance)

from conftest import worked_example


def test_instance_round_trip(tmp_path):
    p = tmp_path / "i.txt"
    write_instance(p, worked_example(), ["class demo"])
    assert p.read_text() == "# class demo\n4 8 3\n4 2 1\n3 1 2\n3 1 3\n2 1 3\n"
    assert read_instance(p) == worked_example()
    assert instance_comments(p.read_text()) == {"class": "demo"}


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("2 8 3\n4 2 1\n", "announces 2"),
    ("1 8 3\n4 x 1\n", "line 2"),
    ("1 8 3\n4 2\n", "expected 3"),
    ("1 8 3\n9 1 1\n", "exceeds capacity"),
])
def test_bad_instance_files(text, msg):
    with pytest.raises(FormatError, match=msg):
        parse_instance(text)


def test_solution_round_trip():
    sol = Solution(((1, 2), (1, 3), (4,)))
    text = format_solution(sol)
    assert text == "1 2\n1 3\n4\n"
    assert parse_solution("# header\n" + text) == sol


def test_bpp_files():
    assert parse_bpp_instance("3\n10\n4\n5\n6\n") == ([4, 5, 6], 10)
    assert parse_bpp_bins("6 4\n5\n") == [[6, 4], [5]]
    with pytest.raises(FormatError):
        parse_bpp_instance("3\n10\n4\n")
