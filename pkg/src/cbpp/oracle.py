"""Brute-force ground truth for tiny instances.

These routines deliberately avoid the discrepancy characterization where
they can: alternatability is decided by searching orderings, and the exact
optimum by searching bin assignments. Size guards raise instead of
truncating.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .bounds import lower_bound
from .core import Instance, ItemMultiset, PackingPattern, Solution
from .errors import GuardError

MAX_ALTERNATABLE = 9
MAX_PATTERNS = 10**6
MAX_COPIES = 8


@lru_cache(maxsize=None)
def _alternates(color_counts: tuple[int, ...], last: int) -> bool:
    if not any(color_counts):
        return True
    for q, n in enumerate(color_counts):
        if n and q != last:
            rest = color_counts[:q] + (n - 1,) + color_counts[q + 1:]
            if _alternates(rest, q):
                return True
    return False


def alternatable_counts(color_counts) -> bool:
    """Search for an ordering of colored copies with no equal neighbours.

    Only colors matter, so the search runs over distinct color sequences
    with memoization on (remaining counts, last color).
    """
    counts = tuple(color_counts)
    if sum(counts) > MAX_ALTERNATABLE:
        raise GuardError(f"{sum(counts)} copies exceed the brute-force limit of {MAX_ALTERNATABLE}")
    return _alternates(counts, -1)


def brute_force_alternatable(s: ItemMultiset, instance: Instance) -> bool:
    s.check(instance)
    counts = s.color_counts(instance)
    return alternatable_counts(tuple(counts[q] for q in sorted(counts)))


def brute_force_permutation(colors) -> tuple[int, ...] | None:
    """An alternating permutation of the given color list, found by enumeration."""
    if len(colors) > MAX_ALTERNATABLE:
        raise GuardError("too many copies for permutation enumeration")
    for perm in sorted(set(itertools.permutations(colors))):
        if all(a != b for a, b in zip(perm, perm[1:])):
            return perm
    return None


def enumerate_patterns(instance: Instance, limit: int = MAX_PATTERNS) -> list[ItemMultiset]:
    """Every non-empty demand-respecting multiset that fits and alternates."""
    items = instance.items
    out: list[ItemMultiset] = []
    L = instance.capacity
    counts = [0] * len(items)
    ccount = [0] * (instance.num_colors + 1)

    def rec(k: int, load: int, size: int):
        if k == len(items):
            if size and max(2 * c - size for c in ccount[1:]) <= 1:
                out.append(ItemMultiset({items[i].id: counts[i] for i in range(len(items)) if counts[i]}))
                if len(out) > limit:
                    raise GuardError(f"pattern universe exceeds {limit}")
            return
        it = items[k]
        for n in range(0, it.demand + 1):
            if load + n * it.length > L:
                break
            counts[k] = n
            ccount[it.color] += n
            rec(k + 1, load + n * it.length, size + n)
            ccount[it.color] -= n
        counts[k] = 0

    rec(0, 0, 0)
    return out


def set_partition_opt(instance: Instance) -> int:
    """Fewest patterns whose sum meets every demand exactly (memoized DP)."""
    patterns = enumerate_patterns(instance)
    ids = [it.id for it in instance.items]
    vecs = [tuple(p.counts.get(i, 0) for i in ids) for p in patterns]

    @lru_cache(maxsize=None)
    def best(rem: tuple[int, ...]) -> float:
        if not any(rem):
            return 0
        # the first item with remaining demand must be covered by some pattern
        k = next(i for i, r in enumerate(rem) if r)
        res = float("inf")
        for v in vecs:
            if v[k] and all(a <= b for a, b in zip(v, rem)):
                res = min(res, 1 + best(tuple(b - a for a, b in zip(v, rem))))
        return res

    return int(best(tuple(it.demand for it in instance.items)))


def brute_force_opt(instance: Instance) -> tuple[int, Solution]:
    """Exact optimum by depth-first search over bin assignments.

    Copies are placed in id order; a copy may join any open bin with room
    (copies of one item never go to an earlier bin than their predecessor)
    or open exactly one new bin. Bin feasibility is decided at the leaves by
    :func:`alternatable_counts`, since adding copies can repair a bin.
    Returns the lexicographically least optimal assignment.
    """
    n = instance.total_copies
    if n > MAX_COPIES:
        raise GuardError(f"{n} copies exceed the brute-force optimum limit of {MAX_COPIES}")
    if n == 0:
        return 0, Solution(())
    copies = [it for it in instance.items for _ in range(it.demand)]
    Q = instance.num_colors
    lb = lower_bound(instance)
    best: list = [n + 1, None]
    bins: list[list] = []
    loads: list[int] = []

    def feasible() -> bool:
        for b in bins:
            cc = [0] * (Q + 1)
            for it in b:
                cc[it.color] += 1
            if not alternatable_counts(tuple(cc[1:])):
                return False
        return True

    def rec(k: int, first_bin: int):
        if len(bins) >= best[0]:
            return
        if best[0] == lb:
            return
        if k == n:
            if feasible():
                best[0] = len(bins)
                best[1] = [list(b) for b in bins]
            return
        it = copies[k]
        start = first_bin if k and copies[k - 1] is it else 0
        for b in range(start, len(bins)):
            if loads[b] + it.length <= instance.capacity:
                bins[b].append(it)
                loads[b] += it.length
                rec(k + 1, b)
                bins[b].pop()
                loads[b] -= it.length
        bins.append([it])
        loads.append(it.length)
        rec(k + 1, len(bins) - 1)
        bins.pop()
        loads.pop()

    rec(0, 0)
    if best[1] is None:
        raise AssertionError("no feasible assignment; every copy alone is always feasible")
    patterns = []
    for b in best[1]:
        order = brute_force_permutation(tuple(it.color for it in b))
        pool = {}
        for it in b:
            pool.setdefault(it.color, []).append(it.id)
        patterns.append(PackingPattern(tuple(pool[c].pop(0) for c in order)))
    return best[0], Solution(tuple(patterns))
