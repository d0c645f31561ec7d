"""Plain-text instance and solution files.

Instance file::

    # optional comment lines
    m L Q
    length demand color      (m lines)

Solution file: one bin per line, item ids separated by single spaces in
packing order. ``#`` starts a comment line in both formats.
"""

from __future__ import annotations

from pathlib import Path

from .core import Instance, PackingPattern, Solution
from .errors import FormatError, InstanceError


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _ints(line: str, lineno: int, n: int | None = None) -> list[int]:
    try:
        vals = [int(t) for t in line.split()]
    except ValueError:
        raise FormatError(f"line {lineno}: expected integers, got {line!r}") from None
    if n is not None and len(vals) != n:
        raise FormatError(f"line {lineno}: expected {n} integers, got {len(vals)}")
    return vals


def parse_instance(text: str) -> Instance:
    lines = list(_data_lines(text))
    if not lines:
        raise FormatError("empty instance file")
    m, L, Q = _ints(lines[0][1], lines[0][0], 3)
    rows = [tuple(_ints(line, lineno, 3)) for lineno, line in lines[1:]]
    if len(rows) != m:
        raise FormatError(f"header announces {m} items, file has {len(rows)}")
    try:
        return Instance.from_tuples(L, Q, rows)
    except InstanceError as exc:
        raise FormatError(str(exc)) from exc


def format_instance(instance: Instance, comments=()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"{instance.m} {instance.capacity} {instance.num_colors}")
    out += [f"{it.length} {it.demand} {it.color}" for it in instance.items]
    return "\n".join(out) + "\n"


def instance_comments(text: str) -> dict[str, str]:
    """``# key value...`` comment lines as a dict (used for benchmark class tags)."""
    meta = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].strip().split(None, 1)
            if len(parts) == 2:
                meta[parts[0]] = parts[1]
    return meta


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text())


def write_instance(path, instance: Instance, comments=()) -> None:
    Path(path).write_text(format_instance(instance, comments))


def parse_solution(text: str) -> Solution:
    return Solution(tuple(PackingPattern(tuple(_ints(line, lineno))) for lineno, line in _data_lines(text)))


def format_solution(sol: Solution) -> str:
    return "".join(" ".join(str(k) for k in b.ordered) + "\n" for b in sol.bins)


def read_solution(path) -> Solution:
    return parse_solution(Path(path).read_text())


def write_solution(path, sol: Solution) -> None:
    Path(path).write_text(format_solution(sol))


def parse_bpp_instance(text: str) -> tuple[list[int], int]:
    """BPPLIB-style file: item count, capacity, then one length per line."""
    vals = [v for lineno, line in _data_lines(text) for v in _ints(line, lineno)]
    if len(vals) < 2:
        raise FormatError("bin packing file needs a count and a capacity")
    n, capacity = vals[0], vals[1]
    lengths = vals[2:]
    if len(lengths) != n:
        raise FormatError(f"bin packing file announces {n} items, has {len(lengths)}")
    return lengths, capacity


def parse_bpp_bins(text: str) -> list[list[int]]:
    """Donor solution: one bin per line, the item lengths it holds."""
    return [_ints(line, lineno) for lineno, line in _data_lines(text)]
