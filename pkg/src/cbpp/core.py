"""Instances, color discrepancy, alternating permutations and solution checks.

A multiset of item copies can be laid out in a bin with no two equal colors
side by side exactly when its color discrepancy is at most one. Everything in
the exact solvers leans on that fact, so it lives here together with the
instance model.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import InfeasibleMultisetError, InstanceError, MalformedMultisetError


@dataclass(frozen=True)
class Item:
    id: int
    length: int
    demand: int
    color: int


@dataclass(frozen=True)
class Instance:
    """A colored bin packing instance.

    Items are distinct (length, color) pairs; ``demand`` copies of each must
    be packed. Item ids run from 1 to ``m`` in order.
    """

    capacity: int
    num_colors: int
    items: tuple[Item, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if self.capacity < 1:
            raise InstanceError(f"capacity must be positive, got {self.capacity}")
        if self.num_colors < 2:
            raise InstanceError(f"need at least 2 colors, got {self.num_colors}")
        seen = set()
        for pos, it in enumerate(self.items, start=1):
            if it.id != pos:
                raise InstanceError(f"item ids must be 1..m without gaps; position {pos} has id {it.id}")
            if it.length < 1 or it.demand < 1:
                raise InstanceError(f"item {it.id}: length and demand must be positive")
            if it.length > self.capacity:
                raise InstanceError(f"item {it.id}: length {it.length} exceeds capacity {self.capacity}")
            if not 1 <= it.color <= self.num_colors:
                raise InstanceError(f"item {it.id}: color {it.color} outside 1..{self.num_colors}")
            key = (it.length, it.color)
            if key in seen:
                raise InstanceError(f"item {it.id}: duplicate (length, color) pair {key}")
            seen.add(key)

    @classmethod
    def from_tuples(cls, capacity: int, num_colors: int, rows: Iterable[tuple[int, int, int]]) -> Instance:
        """Build from ``(length, demand, color)`` rows, numbering items from 1."""
        items = tuple(Item(k, l, d, c) for k, (l, d, c) in enumerate(rows, start=1))
        return cls(capacity, num_colors, items)

    @property
    def m(self) -> int:
        return len(self.items)

    @property
    def total_copies(self) -> int:
        return sum(it.demand for it in self.items)

    @property
    def total_length(self) -> int:
        return sum(it.length * it.demand for it in self.items)

    def item(self, item_id: int) -> Item:
        if not 1 <= item_id <= len(self.items):
            raise MalformedMultisetError(f"unknown item id {item_id}")
        return self.items[item_id - 1]

    def full_multiset(self) -> ItemMultiset:
        return ItemMultiset({it.id: it.demand for it in self.items})


@dataclass(frozen=True)
class ItemMultiset:
    """Counts of item copies keyed by item id. Zero counts are dropped."""

    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in sorted(dict(self.counts).items()):
            if v < 0:
                raise MalformedMultisetError(f"negative count {v} for item {k}")
            if v:
                clean[int(k)] = int(v)
        object.__setattr__(self, "counts", MappingProxyType(clean))

    @classmethod
    def from_ids(cls, ids: Iterable[int]) -> ItemMultiset:
        return cls(Counter(ids))

    def __len__(self):
        return sum(self.counts.values())

    def __eq__(self, other):
        if not isinstance(other, ItemMultiset):
            return NotImplemented
        return dict(self.counts) == dict(other.counts)

    def __hash__(self):
        return hash(tuple(self.counts.items()))

    def __repr__(self):
        return f"ItemMultiset({dict(self.counts)})"

    def add(self, item_id: int, n: int = 1) -> ItemMultiset:
        c = dict(self.counts)
        c[item_id] = c.get(item_id, 0) + n
        return ItemMultiset(c)

    def union(self, other: ItemMultiset) -> ItemMultiset:
        c = Counter(self.counts)
        c.update(other.counts)
        return ItemMultiset(c)

    def check(self, instance: Instance) -> None:
        """Raise :class:`MalformedMultisetError` unless ids exist and counts respect demands."""
        for k, v in self.counts.items():
            it = instance.item(k)
            if v > it.demand:
                raise MalformedMultisetError(f"item {k}: {v} copies exceed demand {it.demand}")

    def total_length(self, instance: Instance) -> int:
        return sum(instance.item(k).length * v for k, v in self.counts.items())

    def color_counts(self, instance: Instance) -> dict[int, int]:
        """Number of copies of each color ``1..Q`` (``|S_q|``)."""
        out = {q: 0 for q in range(1, instance.num_colors + 1)}
        for k, v in self.counts.items():
            out[instance.item(k).color] += v
        return out

    def by_color(self, instance: Instance) -> dict[int, ItemMultiset]:
        parts: dict[int, dict[int, int]] = {q: {} for q in range(1, instance.num_colors + 1)}
        for k, v in self.counts.items():
            parts[instance.item(k).color][k] = v
        return {q: ItemMultiset(p) for q, p in parts.items()}

    def copies(self) -> list[int]:
        """Expanded copy list, ids ascending."""
        return [k for k, v in self.counts.items() for _ in range(v)]


@dataclass(frozen=True)
class DiscrepancyReport:
    per_color: Mapping[int, int]
    delta: int
    critical_color: int


@dataclass(frozen=True)
class PackingPattern:
    """One bin, as the ordered sequence of item ids (one entry per copy)."""

    ordered: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ordered", tuple(self.ordered))

    def __len__(self):
        return len(self.ordered)

    def __iter__(self):
        return iter(self.ordered)

    def multiset(self) -> ItemMultiset:
        return ItemMultiset.from_ids(self.ordered)

    def length(self, instance: Instance) -> int:
        return sum(instance.item(k).length for k in self.ordered)

    def colors(self, instance: Instance) -> list[int]:
        return [instance.item(k).color for k in self.ordered]


@dataclass(frozen=True)
class Solution:
    bins: tuple[PackingPattern, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(b if isinstance(b, PackingPattern) else PackingPattern(b)
                                               for b in self.bins))

    def __len__(self):
        return len(self.bins)

    def canonical(self) -> list[tuple[int, ...]]:
        """Bins as sorted id tuples, themselves sorted; order-free comparison key."""
        return sorted(tuple(sorted(b.ordered)) for b in self.bins)


def _discrepancy_from_counts(color_counts: Mapping[int, int]) -> DiscrepancyReport:
    size = sum(color_counts.values())
    per_color = {q: 2 * n - size for q, n in color_counts.items()}
    delta = max(per_color.values())
    critical = min(q for q, v in per_color.items() if v == delta)
    return DiscrepancyReport(MappingProxyType(per_color), delta, critical)


def discrepancy(s: ItemMultiset, instance: Instance) -> DiscrepancyReport:
    """Per-color discrepancy ``|S_q| - |S \\ S_q|`` and its maximum.

    The critical color is the smallest color index attaining the maximum.
    """
    s.check(instance)
    return _discrepancy_from_counts(s.color_counts(instance))


def is_alternatable(s: ItemMultiset, instance: Instance) -> bool:
    return discrepancy(s, instance).delta <= 1


def majority_condition(s: ItemMultiset, instance: Instance) -> bool:
    """``|S_{q*}| <= ceil(|S| / 2)``; equivalent to :func:`is_alternatable`."""
    rep = discrepancy(s, instance)
    counts = s.color_counts(instance)
    return counts[rep.critical_color] <= math.ceil(len(s) / 2)


def alternate(s: ItemMultiset, instance: Instance) -> PackingPattern:
    """Arrange the copies of ``s`` so that adjacent colors differ.

    The most frequent color seeds ``k`` sequences, one copy each; the copies
    of the remaining colors are dealt round-robin over those sequences, and
    the sequences are concatenated.
    """
    rep = discrepancy(s, instance)
    if rep.delta > 1:
        raise InfeasibleMultisetError(
            f"color {rep.critical_color} has discrepancy {rep.delta}; no alternating order exists")
    if len(s) == 0:
        return PackingPattern(())
    groups = s.by_color(instance)
    counts = s.color_counts(instance)
    order = sorted(counts, key=lambda q: (-counts[q], q))
    first, rest = order[0], order[1:]
    seqs = [[k] for k in groups[first].copies()]
    j = 0
    for q in rest:
        for k in groups[q].copies():
            seqs[j].append(k)
            j = (j + 1) % len(seqs)
    return PackingPattern(tuple(k for seq in seqs for k in seq))


def has_adjacent_repeat(colors: Sequence[int]) -> bool:
    return any(a == b for a, b in zip(colors, colors[1:]))


@dataclass
class VerificationReport:
    n_bins: int
    violations: list[str] = field(default_factory=list)
    witnesses: list[PackingPattern | None] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_solution(instance: Instance, sol: Solution, mode: str = "ordered") -> VerificationReport:
    """Check capacity, exact demands and color alternation of every bin.

    ``mode="ordered"`` checks adjacency as the bins are written;
    ``mode="existential"`` only asks that each bin admit some alternating
    order and attaches one as a witness. Violations are collected, never raised.
    """
    if mode not in ("ordered", "existential"):
        raise ValueError(f"unknown verification mode {mode!r}")
    rep = VerificationReport(n_bins=len(sol.bins))
    used: Counter[int] = Counter()
    for b, pat in enumerate(sol.bins, start=1):
        bad = [k for k in pat.ordered if not 1 <= k <= instance.m]
        if bad:
            rep.violations.append(f"bin {b}: unknown item ids {bad}")
            rep.witnesses.append(None)
            continue
        if not pat.ordered:
            rep.violations.append(f"bin {b}: empty")
        used.update(pat.ordered)
        load = pat.length(instance)
        if load > instance.capacity:
            rep.violations.append(f"bin {b}: load {load} exceeds capacity {instance.capacity}")
        ms = pat.multiset()
        counts = ms.color_counts(instance)
        delta = _discrepancy_from_counts(counts).delta
        if mode == "ordered":
            cols = pat.colors(instance)
            for pos in range(len(cols) - 1):
                if cols[pos] == cols[pos + 1]:
                    rep.violations.append(
                        f"bin {b}: positions {pos + 1},{pos + 2} share color {cols[pos]}")
            rep.witnesses.append(pat)
        else:
            if delta > 1:
                rep.violations.append(f"bin {b}: color discrepancy {delta} > 1, no alternating order")
                rep.witnesses.append(None)
            else:
                # per-bin demands may be exceeded in a broken solution; build the witness directly
                rep.witnesses.append(_alternate_unchecked(ms, instance))
    for it in instance.items:
        got = used.get(it.id, 0)
        if got != it.demand:
            rep.violations.append(f"item {it.id}: packed {got} copies, demand is {it.demand}")
    return rep


def _alternate_unchecked(ms: ItemMultiset, instance: Instance) -> PackingPattern:
    relaxed = Instance(instance.capacity, instance.num_colors,
                       tuple(Item(it.id, it.length, max(it.demand, ms.counts.get(it.id, 0)), it.color)
                             for it in instance.items))
    return alternate(ms, relaxed)
